//! The normalized partition function by symmetric sum, recursion and
//! determinant; the prefactor relating it to the full partition function;
//! and the two auxiliary function families used to prove the determinant.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::{self, dd, sin as dsin, DdComplex};
use crate::lattice::{
    partition_contraction, partition_enumeration, partition_face_form, MAX_CONTRACTION_N, MAX_ENUMERATION_N,
    MAX_FACE_FORM_N,
};
use crate::linalg::{c, ext_rel_diff, lu_determinant, CMatrix, ExtComplex, LuDeterminant, ProductAcc};
use crate::report::VerificationReport;
use crate::trig::{nonzero, sin_nz, ModelParams, WeightVector, C64, GENERICITY_DELTA};

/// Largest N accepted by [`normalized_partition_sum`].
pub const MAX_SUM_N: usize = 8;
/// Largest N accepted by [`normalized_partition_recursion`].
pub const MAX_RECURSION_N: usize = 10;
/// Largest N accepted by [`residue_check`].
pub const MAX_RESIDUE_N: usize = 4;
/// Pivot growth above which a determinant is reported as ill-conditioned.
pub const ILL_CONDITIONED_GROWTH: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Enumeration,
    Contraction,
    FaceForm,
    SymmetricSum,
    Recursion,
    Determinant,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Enumeration,
        Method::Contraction,
        Method::FaceForm,
        Method::SymmetricSum,
        Method::Recursion,
        Method::Determinant,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Enumeration => "enumeration",
            Method::Contraction => "contraction",
            Method::FaceForm => "face-form",
            Method::SymmetricSum => "symmetric-sum",
            Method::Recursion => "recursion",
            Method::Determinant => "determinant",
        }
    }

    /// Hard size cap of the method, if any.
    pub fn max_n(&self) -> Option<usize> {
        match self {
            Method::Enumeration => Some(MAX_ENUMERATION_N),
            Method::Contraction => Some(MAX_CONTRACTION_N),
            Method::FaceForm => Some(MAX_FACE_FORM_N),
            Method::SymmetricSum => Some(MAX_SUM_N),
            Method::Recursion => Some(MAX_RECURSION_N),
            Method::Determinant => None,
        }
    }

    pub fn supports(&self, n: usize) -> bool {
        self.max_n().is_none_or(|m| n <= m)
    }

    /// Oracle methods compute the full partition function directly; the
    /// others compute the normalized one.
    pub fn is_oracle(&self) -> bool {
        matches!(self, Method::Enumeration | Method::Contraction | Method::FaceForm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// Which λ-dependent factor relates the full and the normalized partition
/// functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrefactorForm {
    /// `Π_{k=1}^{M} sin(λ₁₂+2kη) sin(λ₁₂−2kη+η) / [sin(λ₁₂+kη) sin(λ₁₂−kη+η)]`
    /// with `M = ⌊N/2⌋`, as usually quoted.
    Printed,
    /// `Π_{n=0}^{N−1} sin(λ₁₂+(N−2n)η) / sin(λ₁₂−nη)`, the factor produced by
    /// the F-basis conjugation of the creation operators.
    #[default]
    Derived,
}

impl FromStr for PrefactorForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "printed" => Ok(PrefactorForm::Printed),
            "derived" => Ok(PrefactorForm::Derived),
            _ => Err(Error::InvalidArgument(format!("unknown prefactor form '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetDiagnostics {
    pub pivot_growth: f64,
    pub ill_conditioned: bool,
}

impl From<&LuDeterminant> for DetDiagnostics {
    fn from(lu: &LuDeterminant) -> Self {
        DetDiagnostics {
            pivot_growth: lu.pivot_growth,
            ill_conditioned: !(lu.pivot_growth <= ILL_CONDITIONED_GROWTH),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionResult {
    pub value: ExtComplex,
    pub method: Method,
    pub n: usize,
    pub elapsed: Duration,
    pub diagnostics: Option<DetDiagnostics>,
    /// Set when `value` is a full partition function obtained as
    /// prefactor × normalized value.
    pub prefactor_form: Option<PrefactorForm>,
}

fn check_size(method: Method, n: usize) -> Result<()> {
    match method.max_n() {
        Some(max) if n > max => Err(Error::size_limit(method.name(), n, max)),
        _ => Ok(()),
    }
}

/// Optional boundary data `(λ, ζ)` for the kernel.
type Boundary = Option<(WeightVector, C64)>;

/// Upper bound for `|sin z|` over the arguments built from `u`, `ξ`, `η`:
/// `|sin z| ≤ cosh(Im z)`.
fn sine_bound(u: &[C64], xi: &[C64], eta: C64) -> f64 {
    let im = |v: &[C64]| v.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    (2.0 * im(u).max(im(xi)) + eta.im.abs()).cosh()
}

/// Checks that both sine factors of a product `d = sin a · sin b` are at
/// least `δ`. When `|d| ≥ δ·bound` this follows from `|sin| ≤ bound`;
/// otherwise the factors are evaluated and checked one by one.
#[inline]
fn check_pair(d: C64, bound: f64, factors: impl FnOnce() -> [(C64, String); 2]) -> Result<()> {
    let t = GENERICITY_DELTA * bound;
    if d.norm_sqr() >= t * t {
        return Ok(());
    }
    for (v, name) in factors() {
        if !(v.norm() >= GENERICITY_DELTA) {
            return Err(Error::singular(name, v.norm()));
        }
    }
    Ok(())
}

/// Kernel
/// `sin η · r_α · c_j / [sin(u_α−ξ_j) sin(u_α+ξ_j+η) sin(u_α−ξ_j+η) sin(u_α+ξ_j)]`
/// with `r_α = sin 2u_α / [sin(λ₁+ζ+u_α) sin(λ₂+ζ+u_α)]` and
/// `c_j = sin(λ₁+ζ−ξ_j) sin(λ₂+ζ+ξ_j)` when boundary data is given (and
/// `r = c = 1` otherwise), together with `Π_{α,j} sin(u_α−ξ_j) sin(u_α+ξ_j+η)`.
///
/// Products of two sines are turned into differences of cosines,
/// `sin(u−ξ) sin(u−ξ+η) = [cos η − cos(2u−2ξ+η)]/2` and so on, with
/// `cos(2u∓2ξ+η)` assembled from sines and cosines of `2u+η` and `2ξ`
/// computed once per row and column, so each entry costs a handful of
/// multiplications and one division.
fn fill_kernel(u: &[C64], xi: &[C64], eta: C64, boundary: Boundary) -> Result<(CMatrix, ExtComplex)> {
    let n = u.len();
    assert_eq!(xi.len(), n);
    let two_u_eta: Vec<C64> = u.iter().map(|&x| 2.0 * x + eta).collect();
    let (cu, su): (Vec<C64>, Vec<C64>) = two_u_eta.iter().map(|z| (z.cos(), z.sin())).unzip();
    let (cx, sx): (Vec<C64>, Vec<C64>) = xi.iter().map(|&x| ((2.0 * x).cos(), (2.0 * x).sin())).unzip();
    let gx: Vec<C64> = xi.iter().map(|&x| (2.0 * x + eta).cos()).collect();
    let ce = eta.cos();
    let bound = sine_bound(u, xi, eta);

    let mut row = vec![eta.sin(); n];
    let mut col = vec![c(1.0, 0.0); n];
    if let Some((lam, zeta)) = boundary {
        let (l1, l2) = (lam.m1(), lam.m2());
        for (a, r) in row.iter_mut().enumerate() {
            let d1 = sin_nz(l1 + zeta + u[a], || format!("sin(lambda_1 + zeta + u_{})", a + 1))?;
            let d2 = sin_nz(l2 + zeta + u[a], || format!("sin(lambda_2 + zeta + u_{})", a + 1))?;
            *r *= (2.0 * u[a]).sin() / (d1 * d2);
        }
        for (j, cj) in col.iter_mut().enumerate() {
            *cj = (l1 + zeta - xi[j]).sin() * (l2 + zeta + xi[j]).sin();
        }
    }

    let pole = |a: usize, j: usize, which: &str| {
        format!(
            "kernel entry ({}, {}): u_{} at pole {which}_{}",
            a + 1,
            j + 1,
            a + 1,
            j + 1
        )
    };
    let threshold = GENERICITY_DELTA * bound;
    let threshold2 = threshold * threshold;
    // Numerator factors are multiplied in short runs before being folded
    // into the extended-range accumulator; each factor lies between δ² and
    // `bound²`, so a run cannot leave the f64 range.
    let run = (280.0 / bound.powi(2).max(1e16).log10()).clamp(1.0, 8.0) as usize;
    let mut m = CMatrix::zeros(n, n);
    let mut num = ProductAcc::new();
    for (j, column) in m.as_mut_slice().chunks_exact_mut(n.max(1)).enumerate().take(n) {
        let (cxj, sxj, cj) = (cx[j], sx[j], col[j]);
        let mut small = false;
        // Branch-free so that the loop vectorizes; pole checks happen in a
        // second pass only when some product fell below the fast threshold.
        for (a, entry) in column.iter_mut().enumerate() {
            let x = cu[a] * cxj;
            let y = su[a] * sxj;
            // sin(u−ξ) sin(u−ξ+η) and sin(u+ξ) sin(u+ξ+η).
            let minus = (ce - x - y) * 0.5;
            let plus = (ce - x + y) * 0.5;
            small |= (minus.norm_sqr() < threshold2) | (plus.norm_sqr() < threshold2);
            let den = minus * plus;
            *entry = row[a] * cj * den.conj() * den.norm_sqr().recip();
        }
        if small {
            for a in 0..n {
                let x = cu[a] * cxj;
                let y = su[a] * sxj;
                check_pair((ce - x - y) * 0.5, bound, || {
                    [
                        ((u[a] - xi[j]).sin(), pole(a, j, "xi")),
                        ((u[a] - xi[j] + eta).sin(), pole(a, j, "xi - eta")),
                    ]
                })?;
                check_pair((ce - x + y) * 0.5, bound, || {
                    [
                        ((u[a] + xi[j]).sin(), pole(a, j, "-xi")),
                        ((u[a] + xi[j] + eta).sin(), pole(a, j, "-xi - eta")),
                    ]
                })?;
            }
        }
        // sin(u−ξ) sin(u+ξ+η).
        for chunk in cu.chunks(run) {
            num.push(chunk.iter().fold(c(1.0, 0.0), |acc, &z| acc * ((gx[j] - z) * 0.5)));
        }
    }
    Ok((m, num.finish()))
}

/// `Π_{α>β} sin(u_α−u_β) sin(u_α+u_β+η) · Π_{k<l} sin(ξ_k−ξ_l) sin(ξ_k+ξ_l)`,
/// each pair product written as a difference of cosines.
fn vandermonde_denominator(u: &[C64], xi: &[C64], eta: C64) -> Result<ExtComplex> {
    let bound = sine_bound(u, xi, eta);
    let cu: Vec<C64> = u.iter().map(|&x| (2.0 * x + eta).cos()).collect();
    let cx: Vec<C64> = xi.iter().map(|&x| (2.0 * x).cos()).collect();
    let mut acc = ProductAcc::new();
    for a in 0..u.len() {
        for b in 0..a {
            let d = (cu[b] - cu[a]) * 0.5;
            check_pair(d, bound, || {
                [
                    ((u[a] - u[b]).sin(), format!("sin(u_{} - u_{})", a + 1, b + 1)),
                    (
                        (u[a] + u[b] + eta).sin(),
                        format!("sin(u_{} + u_{} + eta)", a + 1, b + 1),
                    ),
                ]
            })?;
            acc.push(d);
        }
    }
    for k in 0..xi.len() {
        for l in (k + 1)..xi.len() {
            let d = (cx[l] - cx[k]) * 0.5;
            check_pair(d, bound, || {
                [
                    ((xi[k] - xi[l]).sin(), format!("sin(xi_{} - xi_{})", k + 1, l + 1)),
                    ((xi[k] + xi[l]).sin(), format!("sin(xi_{} + xi_{})", k + 1, l + 1)),
                ]
            })?;
            acc.push(d);
        }
    }
    Ok(acc.finish())
}

/// `Π sin(u_α−ξ_i) sin(u_α+ξ_i+η) · det K / Vandermonde` for the kernel of
/// [`fill_kernel`].
fn determinant_formula(u: &[C64], xi: &[C64], eta: C64, boundary: Boundary) -> Result<(ExtComplex, LuDeterminant)> {
    let (m, num) = fill_kernel(u, xi, eta, boundary)?;
    let den = vandermonde_denominator(u, xi, eta)?;
    let lu = lu_determinant(m);
    Ok((num * lu.det / den, lu))
}

/// The N×N matrix 𝒩 of the determinant representation.
pub fn n_matrix(p: &ModelParams) -> Result<CMatrix> {
    Ok(fill_kernel(&p.u, &p.xi, p.eta, Some((p.lambda, p.zeta)))?.0)
}

/// Single-site factor of the symmetric sum:
/// `sin(λ₁+ζ−ξ) sin(λ₂+ζ+ξ) sin 2u sin η / [sin(λ₁+ζ+u) sin(λ₂+ζ+u) sin(u−ξ+η) sin(u+ξ)]`.
fn site_factor(u: C64, xi: C64, p: &ModelParams) -> Result<C64> {
    let (l1, l2, z, eta) = (p.lambda.m1(), p.lambda.m2(), p.zeta, p.eta);
    let d = sin_nz(l1 + z + u, || "sin(lambda_1 + zeta + u)".into())?
        * sin_nz(l2 + z + u, || "sin(lambda_2 + zeta + u)".into())?
        * sin_nz(u - xi + eta, || "sin(u - xi + eta)".into())?
        * sin_nz(u + xi, || "sin(u + xi)".into())?;
    Ok((l1 + z - xi).sin() * (l2 + z + xi).sin() * (2.0 * u).sin() * eta.sin() / d)
}

/// `sin(u−ξ) sin(u+ξ+η) / [sin(u−ξ+η) sin(u+ξ)]`.
fn spectral_ratio(u: C64, xi: C64, eta: C64) -> Result<C64> {
    let d = sin_nz(u - xi + eta, || "sin(u - xi + eta)".into())? * sin_nz(u + xi, || "sin(u + xi)".into())?;
    Ok((u - xi).sin() * (u + xi + eta).sin() / d)
}

/// `sin(ξ_a − ξ_b + η) / sin(ξ_a − ξ_b)`.
fn xi_ratio(xa: C64, xb: C64, eta: C64) -> Result<C64> {
    Ok((xa - xb + eta).sin() / sin_nz(xa - xb, || "sin(xi_a - xi_b)".into())?)
}

/// The permutation sum. Clustered inhomogeneities make its terms cancel by
/// many orders of magnitude, so factors and terms are carried in
/// double-double precision; the pole checks still run on the `f64` values.
fn sum_value(p: &ModelParams) -> Result<C64> {
    let n = p.n;
    let zero = extended::dd(c(0.0, 0.0));
    let mut single = vec![vec![zero; n]; n];
    // pair[a][i][j]: factor for u_a with σ(a) = i and a later σ(k) = j.
    let mut pair = vec![vec![vec![zero; n]; n]; n];
    for a in 0..n {
        for i in 0..n {
            site_factor(p.u[a], p.xi[i], p)?;
            single[a][i] = site_factor_dd(p.u[a], p.xi[i], p);
            for j in 0..n {
                if i != j {
                    spectral_ratio(p.u[a], p.xi[j], p.eta)?;
                    xi_ratio(p.xi[i], p.xi[j], p.eta)?;
                    pair[a][i][j] = spectral_ratio_dd(p.u[a], p.xi[j], p.eta) * xi_ratio_dd(p.xi[i], p.xi[j], p.eta);
                }
            }
        }
    }
    let mut total = zero;
    for sigma in (0..n).permutations(n) {
        let mut term = extended::one();
        for a in 0..n {
            let i = sigma[a];
            term *= single[a][i];
            for &j in &sigma[a + 1..] {
                term *= pair[a][i][j];
            }
        }
        total += term;
    }
    if n == 0 {
        total = extended::one();
    }
    Ok(extended::to_c64(total))
}

fn site_factor_dd(u: C64, xi: C64, p: &ModelParams) -> DdComplex {
    let (l1, l2, z, eta) = (dd(p.lambda.m1()), dd(p.lambda.m2()), dd(p.zeta), dd(p.eta));
    let (u, xi) = (dd(u), dd(xi));
    let num = dsin(l1 + z - xi) * dsin(l2 + z + xi) * dsin(u + u) * dsin(eta);
    num / (dsin(l1 + z + u) * dsin(l2 + z + u) * dsin(u - xi + eta) * dsin(u + xi))
}

fn spectral_ratio_dd(u: C64, xi: C64, eta: C64) -> DdComplex {
    let (u, xi, eta) = (dd(u), dd(xi), dd(eta));
    dsin(u - xi) * dsin(u + xi + eta) / (dsin(u - xi + eta) * dsin(u + xi))
}

fn xi_ratio_dd(xa: C64, xb: C64, eta: C64) -> DdComplex {
    let (xa, xb, eta) = (dd(xa), dd(xb), dd(eta));
    dsin(xa - xb + eta) / dsin(xa - xb)
}

/// Normalized partition function as the sum over all N! permutations.
pub fn normalized_partition_sum(p: &ModelParams) -> Result<PartitionResult> {
    check_size(Method::SymmetricSum, p.n)?;
    let start = Instant::now();
    let value = sum_value(p)?;
    Ok(PartitionResult {
        value: value.into(),
        method: Method::SymmetricSum,
        n: p.n,
        elapsed: start.elapsed(),
        diagnostics: None,
        prefactor_form: None,
    })
}

/// Normalized partition function from the recursion in the last spectral
/// parameter, memoized over subsets of inhomogeneities (bitmask keys),
/// starting from `𝒵₀ = 1`.
pub fn normalized_partition_recursion(p: &ModelParams) -> Result<PartitionResult> {
    check_size(Method::Recursion, p.n)?;
    let start = Instant::now();
    let n = p.n;
    let mut single = vec![vec![c(0.0, 0.0); n]; n];
    let mut ratio = vec![vec![c(0.0, 0.0); n]; n];
    let mut xr = vec![vec![c(0.0, 0.0); n]; n];
    for a in 0..n {
        for i in 0..n {
            single[a][i] = site_factor(p.u[a], p.xi[i], p)?;
            ratio[a][i] = spectral_ratio(p.u[a], p.xi[i], p.eta)?;
            if a != i {
                // sin(ξ_a − ξ_i + η)/sin(ξ_a − ξ_i), indexed [j][i].
                xr[a][i] = xi_ratio(p.xi[a], p.xi[i], p.eta)?;
            }
        }
    }
    let full = (1usize << n) - 1;
    let mut memo = vec![c(0.0, 0.0); 1 << n];
    memo[0] = c(1.0, 0.0);
    // Masks in increasing numeric order: every proper subset precedes its
    // supersets, so the table fills bottom-up deterministically.
    for mask in 1..=full {
        let k = mask.count_ones() as usize;
        let last = k - 1;
        let mut total = c(0.0, 0.0);
        for i in (0..n).filter(|i| mask & (1 << i) != 0) {
            let mut term = single[last][i] * memo[mask & !(1 << i)];
            for r in ratio.iter().take(last) {
                term *= r[i];
            }
            for j in (0..n).filter(|&j| j != i && mask & (1 << j) != 0) {
                term *= xr[j][i];
            }
            total += term;
        }
        memo[mask] = total;
    }
    Ok(PartitionResult {
        value: memo[full].into(),
        method: Method::Recursion,
        n,
        elapsed: start.elapsed(),
        diagnostics: None,
        prefactor_form: None,
    })
}

/// Normalized partition function from the determinant representation,
/// with the pivot growth of the LU factorization as diagnostics.
pub fn normalized_partition_determinant(p: &ModelParams) -> Result<PartitionResult> {
    let start = Instant::now();
    let (value, lu) = determinant_formula(&p.u, &p.xi, p.eta, Some((p.lambda, p.zeta)))?;
    Ok(PartitionResult {
        value,
        method: Method::Determinant,
        n: p.n,
        elapsed: start.elapsed(),
        diagnostics: Some(DetDiagnostics::from(&lu)),
        prefactor_form: None,
    })
}

/// Normalized partition function by one of the formula methods.
pub fn normalized_partition(p: &ModelParams, method: Method) -> Result<PartitionResult> {
    match method {
        Method::SymmetricSum => normalized_partition_sum(p),
        Method::Recursion => normalized_partition_recursion(p),
        Method::Determinant => normalized_partition_determinant(p),
        _ => Err(Error::InvalidArgument(format!(
            "{method} computes the full partition function, not the normalized one"
        ))),
    }
}

/// The full/normalized prefactor, split into its λ part and its (u, ξ) part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefactorValue {
    pub value: ExtComplex,
    pub lambda_part: C64,
    pub spectral_part: ExtComplex,
    pub form: PrefactorForm,
    /// Upper limit used by the printed product, `⌊N/2⌋`.
    pub m_used: usize,
    /// The printed form was evaluated at odd N, where its upper limit is not
    /// pinned down; the value is then a hypothesis to be checked.
    pub flagged_odd: bool,
}

/// `Π_{l,i} sin(u_i+ξ_l) / sin(u_i+ξ_l+η)`.
pub fn spectral_prefactor(p: &ModelParams) -> Result<ExtComplex> {
    let mut acc = ProductAcc::new();
    for (i, &u) in p.u.iter().enumerate() {
        for (l, &x) in p.xi.iter().enumerate() {
            let d = sin_nz(u + x + p.eta, || format!("sin(u_{} + xi_{} + eta)", i + 1, l + 1))?;
            acc.push((u + x).sin() / d);
        }
    }
    Ok(acc.finish())
}

/// λ-dependent factor of the given form at size `n`.
pub fn lambda_prefactor(n: usize, lambda: WeightVector, eta: C64, form: PrefactorForm) -> Result<C64> {
    let l12 = lambda.m12();
    let name = |k: f64| move || format!("sin(lambda_12 + ({k})*eta)");
    let mut f = c(1.0, 0.0);
    match form {
        PrefactorForm::Printed => {
            for k in 1..=(n / 2) {
                let k = k as f64;
                let d = sin_nz(l12 + k * eta, name(k))? * sin_nz(l12 - k * eta + eta, name(1.0 - k))?;
                f *= (l12 + 2.0 * k * eta).sin() * (l12 - 2.0 * k * eta + eta).sin() / d;
            }
        }
        PrefactorForm::Derived => {
            for j in 0..n {
                let j = j as f64;
                let d = sin_nz(l12 - j * eta, name(-j))?;
                f *= (l12 + (n as f64 - 2.0 * j) * eta).sin() / d;
            }
        }
    }
    Ok(f)
}

/// Prefactor of the given form relating `Z_N` to `𝒵_N`.
pub fn prefactor_with(form: PrefactorForm, p: &ModelParams) -> Result<PrefactorValue> {
    let lambda_part = lambda_prefactor(p.n, p.lambda, p.eta, form)?;
    let spectral_part = spectral_prefactor(p)?;
    Ok(PrefactorValue {
        value: spectral_part * lambda_part,
        lambda_part,
        spectral_part,
        form,
        m_used: p.n / 2,
        flagged_odd: form == PrefactorForm::Printed && p.n % 2 == 1,
    })
}

/// The printed prefactor at size `n` with boundary parameter `lambda` and
/// crossing parameter `eta`; the spectral part uses `p.u`, `p.xi`.
pub fn prefactor(n: usize, lambda: WeightVector, eta: C64, p: &ModelParams) -> Result<PrefactorValue> {
    if n != p.n {
        return Err(Error::LengthMismatch {
            field: "u",
            n,
            len: p.n,
        });
    }
    let q = ModelParams {
        lambda,
        eta,
        ..p.clone()
    };
    prefactor_with(PrefactorForm::Printed, &q)
}

/// Full partition function by any method. Formula methods are multiplied by
/// the prefactor of the given form; oracle methods ignore `form`.
pub fn full_partition(p: &ModelParams, method: Method, form: PrefactorForm) -> Result<PartitionResult> {
    check_size(method, p.n)?;
    let start = Instant::now();
    let oracle = |v: C64| PartitionResult {
        value: v.into(),
        method,
        n: p.n,
        elapsed: start.elapsed(),
        diagnostics: None,
        prefactor_form: None,
    };
    match method {
        Method::Enumeration => Ok(oracle(partition_enumeration(p)?)),
        Method::Contraction => Ok(oracle(partition_contraction(p)?)),
        Method::FaceForm => Ok(oracle(partition_face_form(p)?)),
        _ => {
            let mut r = normalized_partition(p, method)?;
            r.value *= prefactor_with(form, p)?.value;
            r.prefactor_form = Some(form);
            r.elapsed = start.elapsed();
            Ok(r)
        }
    }
}

fn check_index(i: usize, p: &ModelParams) -> Result<()> {
    if i == 0 || i > p.n {
        return Err(Error::InvalidArgument(format!("index {i} must lie in 1..={}", p.n)));
    }
    Ok(())
}

/// `B_I = Π_{l≤I} sin(λ₁+ζ+u_l) sin(λ₂+ζ+u_l) / [sin(λ₁+ζ−ξ_l) sin(λ₂+ζ+ξ_l) sin 2u_l] · 𝒵_I`,
/// with `𝒵_I` from the symmetric sum over the first `I` parameters.
pub fn appendix_b(i: usize, p: &ModelParams) -> Result<C64> {
    check_index(i, p)?;
    let q = p.truncated(i);
    let (l1, l2, z) = (p.lambda.m1(), p.lambda.m2(), p.zeta);
    let mut f = c(1.0, 0.0);
    for l in 0..i {
        let (u, x) = (p.u[l], p.xi[l]);
        let d = nonzero(
            (l1 + z - x).sin() * (l2 + z + x).sin() * (2.0 * u).sin(),
            GENERICITY_DELTA,
            || format!("B-function denominator at l = {}", l + 1),
        )?;
        f *= (l1 + z + u).sin() * (l2 + z + u).sin() / d;
    }
    check_size(Method::SymmetricSum, i)?;
    Ok(f * sum_value(&q)?)
}

/// `F_I`: the boundary-free determinant over the first `I` parameters.
pub fn appendix_f(i: usize, p: &ModelParams) -> Result<C64> {
    check_index(i, p)?;
    Ok(determinant_formula(&p.u[..i], &p.xi[..i], p.eta, None)?.0.to_c64())
}

/// `F_I` from its recursion in `u_I`, with `F_{I−1}` from the determinant.
pub fn appendix_f_recursion(i: usize, p: &ModelParams) -> Result<C64> {
    check_index(i, p)?;
    let (u, xi, eta) = (&p.u[..i], &p.xi[..i], p.eta);
    let un = u[i - 1];
    let mut total = c(0.0, 0.0);
    for k in 0..i {
        let mut term = eta.sin()
            / (sin_nz(un - xi[k] + eta, || "sin(u_N - xi_i + eta)".into())?
                * sin_nz(un + xi[k], || "sin(u_N + xi_i)".into())?);
        for &ul in &u[..i - 1] {
            term *= (ul - xi[k]).sin() * (ul + xi[k] + eta).sin()
                / (sin_nz(un - ul, || "sin(u_N - u_l)".into())?
                    * sin_nz(un + ul + eta, || "sin(u_N + u_l + eta)".into())?);
        }
        for j in (0..i).filter(|&j| j != k) {
            term *= (un - xi[j]).sin() * (un + xi[j] + eta).sin()
                / (sin_nz(xi[j] - xi[k], || "sin(xi_j - xi_i)".into())?
                    * sin_nz(xi[j] + xi[k], || "sin(xi_j + xi_i)".into())?);
        }
        let rest: Vec<C64> = (0..i).filter(|&j| j != k).map(|j| xi[j]).collect();
        let sub = if i == 1 {
            ExtComplex::one()
        } else {
            determinant_formula(&u[..i - 1], &rest, eta, None)?.0
        };
        total += term * sub.to_c64();
    }
    Ok(total)
}

/// Ratios `|B_I(Im u_I = far)| / |B_I(Im u_I = near)|` and the same for
/// `F_I`, with the real part of `u_I` kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRatios {
    pub b: f64,
    pub f: f64,
}

pub fn appendix_decay(i: usize, near: f64, far: f64, p: &ModelParams) -> Result<DecayRatios> {
    check_index(i, p)?;
    let at = |im: f64| -> Result<(C64, C64)> {
        let mut u = p.u.clone();
        u[i - 1] = c(u[i - 1].re, im);
        let q = p.with_u(u)?;
        Ok((appendix_b(i, &q)?, appendix_f(i, &q)?))
    };
    let (b0, f0) = at(near)?;
    let (b1, f1) = at(far)?;
    Ok(DecayRatios {
        b: b1.norm() / b0.norm(),
        f: f1.norm() / f0.norm(),
    })
}

/// Pole of `B_N`, `F_N` in `u_N` probed by [`residue_check`] (0-based `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResiduePole {
    /// `u_N = ξ_i − η`.
    XiMinusEta,
    /// `u_N = −ξ_i`.
    MinusXi,
}

/// Offsets used for the residue extrapolation.
pub const RESIDUE_STEPS: [f64; 3] = [1e-4, 1e-5, 1e-6];

/// Richardson extrapolation of `g(ε) = ε·f(pole+ε)` to `ε → 0` from
/// samples at `ε, ε/10, ε/100`.
fn richardson(samples: [C64; 3]) -> C64 {
    let a = (samples[1] * 10.0 - samples[0]) / 9.0;
    let b = (samples[2] * 10.0 - samples[1]) / 9.0;
    (b * 100.0 - a) / 99.0
}

/// Residues of `B_N` and `F_N` at a pole in `u_N`, and their relative
/// difference. `i` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueComparison {
    pub residue_b: C64,
    pub residue_f: C64,
    pub report_residual: f64,
}

pub fn residue_values(i: usize, pole: ResiduePole, p: &ModelParams) -> Result<ResidueComparison> {
    check_index(i, p)?;
    let n = p.n;
    if n > MAX_RESIDUE_N {
        return Err(Error::size_limit("residue check", n, MAX_RESIDUE_N));
    }
    let xi = p.xi[i - 1];
    let at = match pole {
        ResiduePole::XiMinusEta => xi - p.eta,
        ResiduePole::MinusXi => -xi,
    };
    // Any other singular point of the two functions in u_N must stay clear.
    let clearance = 10.0 * RESIDUE_STEPS[0];
    let mut others: Vec<(String, C64)> = Vec::new();
    for (j, &x) in p.xi.iter().enumerate() {
        for (name, q) in [
            ("xi - eta", x - p.eta),
            ("-xi", -x),
            ("xi", x),
            ("-xi - eta", -x - p.eta),
        ] {
            if q != at {
                others.push((format!("{name}_{}", j + 1), q));
            }
        }
    }
    for (l, &u) in p.u[..n - 1].iter().enumerate() {
        others.push((format!("u_{}", l + 1), u));
        others.push((format!("-u_{} - eta", l + 1), -u - p.eta));
    }
    others.push(("-lambda_1 - zeta".into(), -p.lambda.m1() - p.zeta));
    others.push(("-lambda_2 - zeta".into(), -p.lambda.m2() - p.zeta));
    others.push(("0".into(), c(0.0, 0.0)));
    others.push(("pi/2".into(), c(std::f64::consts::FRAC_PI_2, 0.0)));
    for (name, q) in others {
        let d = (at - q).sin().norm();
        if d < clearance {
            return Err(Error::singular(
                format!("another singular point {name} near the probed pole"),
                d,
            ));
        }
    }
    let mut gb = [c(0.0, 0.0); 3];
    let mut gf = [c(0.0, 0.0); 3];
    for (k, &eps) in RESIDUE_STEPS.iter().enumerate() {
        let mut u = p.u.clone();
        u[n - 1] = at + eps;
        let q = p.with_u(u)?;
        gb[k] = appendix_b(n, &q)? * eps;
        gf[k] = appendix_f(n, &q)? * eps;
    }
    let residue_b = richardson(gb);
    let residue_f = richardson(gf);
    Ok(ResidueComparison {
        residue_b,
        residue_f,
        report_residual: crate::linalg::rel_diff(residue_b, residue_f),
    })
}

/// Compares the residues of `B_N` and `F_N` at the given pole of `u_N`
/// (`i` is 1-based); the residual is their relative difference.
pub fn residue_check(i: usize, pole: ResiduePole, p: &ModelParams) -> Result<VerificationReport> {
    let r = residue_values(i, pole, p)?;
    let label = match pole {
        ResiduePole::XiMinusEta => format!("residue at u_N = xi_{i} - eta"),
        ResiduePole::MinusXi => format!("residue at u_N = -xi_{i}"),
    };
    Ok(VerificationReport::new(label, r.report_residual)
        .with("residue_B", r.residue_b)
        .with("residue_F", r.residue_f))
}

/// Relative difference of two partition results.
pub fn result_rel_diff(a: &PartitionResult, b: &PartitionResult) -> f64 {
    ext_rel_diff(a.value, b.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_diff;
    use crate::trig::ParamSampler;

    #[test]
    fn n1_sum_matches_closed_form() {
        let p = ParamSampler::new(1).params(1);
        let (l1, l2, z, eta, u, x) = (p.lambda.m1(), p.lambda.m2(), p.zeta, p.eta, p.u[0], p.xi[0]);
        let expect = eta.sin() * (l1 + z - x).sin() * (l2 + z + x).sin() * (2.0 * u).sin()
            / ((l1 + z + u).sin() * (l2 + z + u).sin() * (u - x + eta).sin() * (u + x).sin());
        let s = normalized_partition_sum(&p).unwrap().value.to_c64();
        assert!(rel_diff(s, expect) < 1e-14);
        let r = normalized_partition_recursion(&p).unwrap().value.to_c64();
        assert!(rel_diff(r, s) < 1e-15);
        let nm = n_matrix(&p).unwrap();
        let via_n = (u - x).sin() * (u + x + eta).sin() * nm[(0, 0)];
        assert!(rel_diff(via_n, s) < 1e-13);
        let d = normalized_partition_determinant(&p).unwrap().value.to_c64();
        assert!(rel_diff(d, s) < 1e-13);
    }

    #[test]
    fn recursion_base_case() {
        let p = ParamSampler::new(2).params(0);
        assert_eq!(normalized_partition_recursion(&p).unwrap().value.to_c64(), c(1.0, 0.0));
    }

    #[test]
    fn formulas_agree_at_small_n() {
        let mut s = ParamSampler::new(3);
        for n in 2..=5 {
            let p = s.params(n);
            let sum = normalized_partition_sum(&p).unwrap().value.to_c64();
            let rec = normalized_partition_recursion(&p).unwrap().value.to_c64();
            let det = normalized_partition_determinant(&p).unwrap().value.to_c64();
            assert!(rel_diff(sum, rec) < 1e-11, "n={n}");
            assert!(rel_diff(sum, det) < 1e-10, "n={n}");
        }
    }

    #[test]
    fn derived_prefactor_links_contraction_to_formulas() {
        let mut s = ParamSampler::new(11);
        for n in 1..=4 {
            let p = s.params(n);
            let z = partition_contraction(&p).unwrap();
            let d = full_partition(&p, Method::Determinant, PrefactorForm::Derived)
                .unwrap()
                .value
                .to_c64();
            assert!(rel_diff(z, d) < 1e-9, "n={n}: {z} vs {d}");
        }
    }

    #[test]
    fn n_matrix_names_the_pole() {
        let mut p = ParamSampler::new(5).params(2);
        p.u[1] = p.xi[0] - p.eta;
        match n_matrix(&p) {
            Err(Error::Singular { what, .. }) => {
                assert!(what.contains("(2, 1)") && what.contains("xi - eta"), "{what}")
            }
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn size_limits() {
        let p = ParamSampler::new(6).params(9);
        assert!(matches!(normalized_partition_sum(&p), Err(Error::SizeLimit { .. })));
        let p = ParamSampler::new(6).params(11);
        assert!(matches!(
            normalized_partition_recursion(&p),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn appendix_base_case() {
        let p = ParamSampler::new(7).params(1);
        let (u, x, eta) = (p.u[0], p.xi[0], p.eta);
        let expect = eta.sin() / ((u - x + eta).sin() * (u + x).sin());
        assert!(rel_diff(appendix_b(1, &p).unwrap(), expect) < 1e-13);
        assert!(rel_diff(appendix_f(1, &p).unwrap(), expect) < 1e-13);
    }

    #[test]
    fn f_recursion_matches_determinant() {
        let p = ParamSampler::new(8).params(3);
        assert!(rel_diff(appendix_f_recursion(3, &p).unwrap(), appendix_f(3, &p).unwrap()) < 1e-10);
    }

    #[test]
    fn n1_residue_matches_derivative_of_closed_form() {
        let p = ParamSampler::new(9).params(1);
        let r = residue_values(1, ResiduePole::XiMinusEta, &p).unwrap();
        let expect = p.eta.sin() / (2.0 * p.xi[0] - p.eta).sin();
        assert!(rel_diff(r.residue_b, expect) < 1e-6);
        assert!(rel_diff(r.residue_f, expect) < 1e-6);
    }

    #[test]
    fn printed_prefactor_examples() {
        let p = ParamSampler::new(10).params(1);
        let v = prefactor(1, p.lambda, p.eta, &p).unwrap();
        let expect = (p.u[0] + p.xi[0]).sin() / (p.u[0] + p.xi[0] + p.eta).sin();
        assert!(rel_diff(v.spectral_part.to_c64(), expect) < 1e-15);
        assert_eq!(v.lambda_part, c(1.0, 0.0));
        assert!(v.flagged_odd);
        assert_eq!(v.m_used, 0);
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("symmetric_sum".parse::<Method>().unwrap(), Method::SymmetricSum);
        assert!("bogus".parse::<Method>().is_err());
    }
}
