//! The Drinfeld twist in the face picture: permutation R-operators, the
//! F-matrix and its factorizing property, the twisted monodromy, and the
//! polarization-free closed forms of the twisted operators.

use std::fmt;

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face::dynamical_two_site;
use crate::lattice::face_monodromy_matrices;
use crate::lattice::{face_creation_operator, MultiSiteOperator};
use crate::linalg::{basis_vector, c, max_norm, max_norm_diff, spin_of, spins_of, vec_max_norm_diff, CMatrix};
use crate::report::VerificationReport;
use crate::trig::{sin_nz, ModelParams, WeightVector, C64, DOWN, GENERICITY_DELTA, UP};

/// Largest N accepted by the F-matrix constructions (they sum over S_N).
pub const MAX_F_BASIS_N: usize = 4;

fn check_n(n: usize) -> Result<()> {
    if n > MAX_F_BASIS_N {
        return Err(Error::size_limit("F-basis", n, MAX_F_BASIS_N));
    }
    Ok(())
}

/// A permutation of `{0, …, N−1}` stored as its image list `σ(k) = images[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::InvalidArgument(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// The transposition of positions `i` and `i+1`.
    pub fn elementary(n: usize, i: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, i + 1);
        Permutation { images }
    }

    /// All permutations of `n` elements in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (0..n).permutations(n).map(|images| Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn image(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn inversions(&self) -> usize {
        let v = &self.images;
        (0..v.len())
            .map(|i| (i + 1..v.len()).filter(|&j| v[j] < v[i]).count())
            .sum()
    }

    /// A minimal decomposition into adjacent swaps: starting from the
    /// identity arrangement, swapping positions `b, b+1` for each `b` in turn
    /// produces the image list. Its length equals the inversion count.
    pub fn decomposition(&self) -> Vec<usize> {
        let mut cur: Vec<usize> = (0..self.len()).collect();
        let mut swaps = Vec::new();
        for k in 0..cur.len() {
            let mut j = cur.iter().position(|&x| x == self.images[k]).expect("permutation");
            while j > k {
                cur.swap(j - 1, j);
                swaps.push(j - 1);
                j -= 1;
            }
        }
        swaps
    }

    /// Whether the swap sequence produces this permutation from the identity
    /// arrangement with no redundant swaps.
    pub fn is_minimal_decomposition(&self, swaps: &[usize]) -> bool {
        if swaps.len() != self.inversions() {
            return false;
        }
        let mut cur: Vec<usize> = (0..self.len()).collect();
        for &b in swaps {
            if b + 1 >= cur.len() {
                return false;
            }
            cur.swap(b, b + 1);
        }
        cur == self.images
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.images.iter().map(|i| i + 1).join(" "))
    }
}

/// F-matrix on N sites together with the weight it was built at.
#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix {
    pub operator: MultiSiteOperator,
    pub weight: WeightVector,
}

impl FMatrix {
    pub fn matrix(&self) -> &CMatrix {
        self.operator.matrix()
    }

    /// `F⁻¹` by forward substitution; fails if a diagonal entry is below the
    /// genericity threshold.
    pub fn inverse(&self) -> Result<CMatrix> {
        let f = self.matrix();
        for i in 0..f.nrows() {
            if f[(i, i)].norm() < GENERICITY_DELTA {
                return Err(Error::NotInvertible(format!("F-matrix diagonal entry {i} vanishes")));
            }
        }
        let id = CMatrix::identity(f.nrows(), f.ncols());
        f.solve_lower_triangular(&id)
            .ok_or_else(|| Error::NotInvertible("F-matrix".into()))
    }

    /// Largest modulus among the strictly upper-triangular entries.
    pub fn upper_max(&self) -> f64 {
        let f = self.matrix();
        (0..f.nrows())
            .flat_map(|i| (i + 1..f.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| f[(i, j)].norm())
            .fold(0.0, f64::max)
    }

    /// Smallest modulus among the diagonal entries.
    pub fn diagonal_min(&self) -> f64 {
        let f = self.matrix();
        (0..f.nrows()).map(|i| f[(i, i)].norm()).fold(f64::INFINITY, f64::min)
    }
}

/// `H = Σ_i h^{(i)}`, diagonal with eigenvalue `Σ_k ĥ_{i_k}` on `|i₁…i_N⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TotalWeightOperator {
    pub n: usize,
}

impl TotalWeightOperator {
    pub fn new(n: usize) -> Self {
        TotalWeightOperator { n }
    }

    /// Number of up spins of basis state `s`.
    pub fn ups(&self, s: usize) -> usize {
        spins_of(s, self.n).iter().filter(|&&x| x == UP).count()
    }

    /// `Σ_k ĥ_{i_k}` on basis state `s`.
    pub fn eigenvalue(&self, s: usize) -> [f64; 2] {
        let ups = self.ups(s) as f64;
        let half = (2.0 * ups - self.n as f64) / 2.0;
        [half, -half]
    }

    /// The diagonal operator `⟨H, ε_d⟩`.
    pub fn component(&self, d: usize) -> MultiSiteOperator {
        let dim = 1usize << self.n;
        let diag: Vec<C64> = (0..dim).map(|s| c(self.eigenvalue(s)[d], 0.0)).collect();
        MultiSiteOperator::on_quantum_sites(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
    }
}

/// `R^σ` composed along `swaps` starting from the site arrangement `start`:
/// each swap `b` multiplies on the left by `R_{a_b, a_{b+1}}(ξ_{a_b} − ξ_{a_{b+1}}; l)`
/// with the weight shifted by the spins on sites `a_0 … a_{b−1}`, then swaps
/// `a_b, a_{b+1}`.
fn r_sigma_from(start: &[usize], swaps: &[usize], l: WeightVector, p: &ModelParams) -> Result<CMatrix> {
    let n = p.n;
    let mut a = start.to_vec();
    let mut m = CMatrix::identity(1 << n, 1 << n);
    for &b in swaps {
        let r = dynamical_two_site(p.xi[a[b]] - p.xi[a[b + 1]], l, p.eta, a[b], a[b + 1], &a[..b], n)?;
        m = r * m;
        a.swap(b, b + 1);
    }
    Ok(m)
}

/// `R^σ(l)` along the greedy minimal decomposition of `σ`.
pub fn r_sigma(sigma: &Permutation, l: WeightVector, p: &ModelParams) -> Result<MultiSiteOperator> {
    r_sigma_with(sigma, &sigma.decomposition(), l, p)
}

/// `R^σ(l)` along a caller-supplied minimal decomposition.
pub fn r_sigma_with(
    sigma: &Permutation,
    swaps: &[usize],
    l: WeightVector,
    p: &ModelParams,
) -> Result<MultiSiteOperator> {
    check_n(p.n)?;
    if sigma.len() != p.n {
        return Err(Error::LengthMismatch {
            field: "sigma",
            n: p.n,
            len: sigma.len(),
        });
    }
    if !sigma.is_minimal_decomposition(swaps) {
        return Err(Error::InvalidArgument(format!(
            "{swaps:?} is not a minimal decomposition of {sigma}"
        )));
    }
    let start: Vec<usize> = (0..p.n).collect();
    Ok(MultiSiteOperator::on_quantum_sites(r_sigma_from(&start, swaps, l, p)?))
}

/// Whether the labels read along `τ` satisfy the admissibility condition:
/// non-decreasing across ascents of `τ`, strictly increasing across descents.
fn admissible(labels: &[usize], tau: &[usize]) -> bool {
    (0..tau.len().saturating_sub(1)).all(|j| {
        if tau[j + 1] > tau[j] {
            labels[j + 1] >= labels[j]
        } else {
            labels[j + 1] > labels[j]
        }
    })
}

/// F-matrix built on the site arrangement `start` (the identity arrangement
/// gives `F_{1…N}`).
fn f_matrix_from(start: &[usize], l: WeightVector, p: &ModelParams) -> Result<CMatrix> {
    let n = p.n;
    let dim = 1usize << n;
    let mut f = CMatrix::zeros(dim, dim);
    for tau in Permutation::all(n) {
        let rt = r_sigma_from(start, &tau.decomposition(), l, p)?;
        for s in 0..dim {
            let labels: Vec<usize> = tau.images().iter().map(|&t| spin_of(s, start[t], n)).collect();
            if admissible(&labels, tau.images()) {
                let mut row = f.row_mut(s);
                row += rt.row(s);
            }
        }
    }
    Ok(f)
}

/// `F_{1…N}(l) = Σ_σ Σ*_{α} Π_j P^{σ(j)}_{α_{σ(j)}} R^σ(l)`.
pub fn f_matrix(l: WeightVector, p: &ModelParams) -> Result<FMatrix> {
    check_n(p.n)?;
    let start: Vec<usize> = (0..p.n).collect();
    Ok(FMatrix {
        operator: MultiSiteOperator::on_quantum_sites(f_matrix_from(&start, l, p)?),
        weight: l,
    })
}

/// `F_{σ(1…N)}(l)`: the F-matrix with sites arranged as `σ(1), …, σ(N)`.
pub fn f_matrix_permuted(sigma: &Permutation, l: WeightVector, p: &ModelParams) -> Result<CMatrix> {
    check_n(p.n)?;
    f_matrix_from(sigma.images(), l, p)
}

fn inverse(m: &CMatrix, what: &str) -> Result<CMatrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::NotInvertible(what.to_string()))
}

/// Residual of `R^σ(l) − F⁻¹_{σ(1…N)}(l) · F_{1…N}(l)`.
pub fn check_factorizing(sigma: &Permutation, l: WeightVector, p: &ModelParams) -> Result<VerificationReport> {
    let r = r_sigma(sigma, l, p)?;
    let f = f_matrix(l, p)?;
    let fs = f_matrix_permuted(sigma, l, p)?;
    let rhs = inverse(&fs, "permuted F-matrix")? * f.matrix();
    Ok(VerificationReport::new(
        format!("factorizing property for {sigma}"),
        max_norm_diff(r.matrix(), &rhs),
    ))
}

/// Residuals of `F|2,…,2⟩ − |2,…,2⟩` and `⟨1,…,1|F − ⟨1,…,1|`.
pub fn check_state_invariance(l: WeightVector, p: &ModelParams) -> Result<VerificationReport> {
    let f = f_matrix(l, p)?;
    let dim = 1usize << p.n;
    let down = basis_vector(dim - 1, p.n);
    let ket = vec_max_norm_diff(&(f.matrix() * &down), &down);
    let up = basis_vector(0, p.n);
    let bra = vec_max_norm_diff(&(f.matrix().transpose() * &up), &up);
    Ok(VerificationReport::new(
        "F-matrix leaves the all-down ket and all-up bra invariant",
        ket.max(bra),
    )
    .with("ket_residual", c(ket, 0.0))
    .with("bra_residual", c(bra, 0.0)))
}

/// Twisted monodromy `T̃(l|u)^i_j = F(l) · T_F(l|u)^i_j · F(l−ηĥ_j)⁻¹`.
pub fn twisted_monodromy(l: WeightVector, u: C64, p: &ModelParams) -> Result<[[MultiSiteOperator; 2]; 2]> {
    check_n(p.n)?;
    let t = face_monodromy_matrices(l, u, &p.xi, p.eta)?;
    let f = f_matrix(l, p)?;
    let finv = [
        f_matrix(l.shift(UP, 1, p.eta), p)?.inverse()?,
        f_matrix(l.shift(DOWN, 1, p.eta), p)?.inverse()?,
    ];
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| MultiSiteOperator::on_quantum_sites(f.matrix() * &t[i][j] * &finv[j]))
    }))
}

/// `Π` over up sites `k` of `sin(u−ξ_k)/sin(u−ξ_k+η)` for basis state `s`.
fn up_site_product(s: usize, u: C64, p: &ModelParams) -> Result<C64> {
    let mut f = c(1.0, 0.0);
    for (k, &spin) in spins_of(s, p.n).iter().enumerate() {
        if spin == UP {
            f *= (u - p.xi[k]).sin() / sin_nz(u - p.xi[k] + p.eta, || format!("sin(u - xi_{} + eta)", k + 1))?;
        }
    }
    Ok(f)
}

/// Closed diagonal form of `T̃²₂(l|u)`:
/// `sin(l₂₁−η)/sin(l₂₁−η+η·n_↑) · Π_{k up} sin(u−ξ_k)/sin(u−ξ_k+η)` on a
/// basis state with `n_↑` up spins.
pub fn twisted_t22_closed(l: WeightVector, u: C64, p: &ModelParams) -> Result<MultiSiteOperator> {
    let dim = 1usize << p.n;
    let h = TotalWeightOperator::new(p.n);
    let l21 = l.m21();
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let ups = h.ups(s) as f64;
        let dressing =
            (l21 - p.eta).sin() / sin_nz(l21 - p.eta + ups * p.eta, || format!("sin(l_21 - eta + {ups}*eta)"))?;
        m[(s, s)] = dressing * up_site_product(s, u, p)?;
    }
    Ok(MultiSiteOperator::on_quantum_sites(m))
}

/// Closed form of `T̃²₁(l|u)`: a sum over down sites `i` of a single-site
/// raising term dressed by the up sites `j ≠ i`.
pub fn twisted_t21_closed(l: WeightVector, u: C64, p: &ModelParams) -> Result<MultiSiteOperator> {
    let (n, eta) = (p.n, p.eta);
    let dim = 1usize << n;
    let l12 = l.m12();
    let s12 = sin_nz(l12, || "sin(l_12)".into())?;
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let spins = spins_of(s, n);
        for i in (0..n).filter(|&i| spins[i] == DOWN) {
            let mut term = eta.sin() * (u - p.xi[i] + l12).sin()
                / (sin_nz(u - p.xi[i] + eta, || format!("sin(u - xi_{} + eta)", i + 1))? * s12);
            for j in (0..n).filter(|&j| j != i && spins[j] == UP) {
                term *= (u - p.xi[j]).sin() * (p.xi[i] - p.xi[j] + eta).sin()
                    / ((u - p.xi[j] + eta).sin() * sin_nz(p.xi[i] - p.xi[j], || "sin(xi_i - xi_j)".into())?);
            }
            m[(s & !(1 << (n - 1 - i)), s)] += term;
        }
    }
    Ok(MultiSiteOperator::on_quantum_sites(m))
}

/// Polarization-free form of the twisted creation operator
/// `F(λ) 𝒯⁻_F(m,λ|u)²₁ F(λ)⁻¹`, with `m` read off each input basis vector.
/// On an input with `n_↑` up spins the common factor is
/// `sin(m₁₂)/sin(m₁−λ₂) · Π_k sin(u+ξ_k)/sin(u+ξ_k+η)` with
/// `m₁₂ = λ₁₂ + (N−2n_↑)η` and `m₁ − λ₂ = λ₁₂ − n_↑η`; each down site `i` is
/// raised with the single-site factor of the symmetric sum, dressed by the
/// up sites `j ≠ i`.
pub fn twisted_creation_closed(lambda: WeightVector, u: C64, p: &ModelParams) -> Result<MultiSiteOperator> {
    let (n, eta, z) = (p.n, p.eta, p.zeta);
    let (l1, l2, l12) = (lambda.m1(), lambda.m2(), lambda.m12());
    let dim = 1usize << n;
    let mut pk = c(1.0, 0.0);
    for (k, &x) in p.xi.iter().enumerate() {
        pk *= (u + x).sin() / sin_nz(u + x + eta, || format!("sin(u + xi_{} + eta)", k + 1))?;
    }
    let boundary = (2.0 * u).sin() * eta.sin()
        / (sin_nz(l1 + z + u, || "sin(lambda_1 + zeta + u)".into())?
            * sin_nz(l2 + z + u, || "sin(lambda_2 + zeta + u)".into())?);
    let h = TotalWeightOperator::new(n);
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let spins = spins_of(s, n);
        let ups = h.ups(s) as f64;
        let pre = (l12 + (n as f64 - 2.0 * ups) * eta).sin()
            / sin_nz(l12 - ups * eta, || format!("sin(lambda_12 - {ups}*eta)"))?
            * pk;
        for i in (0..n).filter(|&i| spins[i] == DOWN) {
            let x = p.xi[i];
            let mut term = boundary * (l1 + z - x).sin() * (l2 + z + x).sin()
                / (sin_nz(u - x + eta, || format!("sin(u - xi_{} + eta)", i + 1))?
                    * sin_nz(u + x, || format!("sin(u + xi_{})", i + 1))?);
            for j in (0..n).filter(|&j| j != i && spins[j] == UP) {
                let y = p.xi[j];
                term *= (u - y).sin() * (u + y + eta).sin() * (x - y + eta).sin()
                    / ((u - y + eta).sin() * (u + y).sin() * sin_nz(x - y, || "sin(xi_i - xi_j)".into())?);
            }
            m[(s & !(1 << (n - 1 - i)), s)] += pre * term;
        }
    }
    Ok(MultiSiteOperator::on_quantum_sites(m))
}

/// `F(λ) 𝒯⁻_F(m,λ|u)²₁ F(λ)⁻¹` from the lattice operators.
pub fn twisted_creation(lambda: WeightVector, u: C64, p: &ModelParams) -> Result<CMatrix> {
    check_n(p.n)?;
    let f = f_matrix(lambda, p)?;
    let t = face_creation_operator(lambda, u, p)?;
    Ok(f.matrix() * t.matrix() * f.inverse()?)
}

/// Moves an operator on positions `0…N−1` to sites `σ(0)…σ(N−1)`.
fn relabel_sites(m: &CMatrix, sigma: &Permutation) -> CMatrix {
    let n = sigma.len();
    let dim = 1usize << n;
    let map = |s: usize| -> usize { (0..n).fold(0, |acc, k| acc | (spin_of(s, k, n) << (n - 1 - sigma.image(k)))) };
    let idx: Vec<usize> = (0..dim).map(map).collect();
    DMatrix::from_fn(dim, dim, |r, col| {
        let (r0, c0) = (
            idx.iter().position(|&x| x == r).unwrap(),
            idx.iter().position(|&x| x == col).unwrap(),
        );
        m[(r0, c0)]
    })
}

/// Face monodromy whose auxiliary line crosses the sites in the order
/// `σ(1), …, σ(N)`.
pub fn face_monodromy_permuted(
    sigma: &Permutation,
    l: WeightVector,
    u: C64,
    p: &ModelParams,
) -> Result<[[CMatrix; 2]; 2]> {
    let xi: Vec<C64> = sigma.images().iter().map(|&k| p.xi[k]).collect();
    let t = face_monodromy_matrices(l, u, &xi, p.eta)?;
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| relabel_sites(&t[i][j], sigma))
    }))
}

/// Residual of the face exchange relation
/// `R^σ(l) T_F(l|u)^i_j = T_{F,σ}(l|u)^i_j R^σ(l−ηĥ_j)` over all `i, j`.
pub fn check_face_exchange(
    sigma: &Permutation,
    l: WeightVector,
    u: C64,
    p: &ModelParams,
) -> Result<VerificationReport> {
    let r = r_sigma(sigma, l, p)?;
    let rs = [
        r_sigma(sigma, l.shift(UP, 1, p.eta), p)?,
        r_sigma(sigma, l.shift(DOWN, 1, p.eta), p)?,
    ];
    let t = face_monodromy_matrices(l, u, &p.xi, p.eta)?;
    let ts = face_monodromy_permuted(sigma, l, u, p)?;
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let lhs = r.matrix() * &t[i][j];
            let rhs = &ts[i][j] * rs[j].matrix();
            residual = residual.max(max_norm_diff(&lhs, &rhs));
            scale = scale.max(max_norm(&lhs));
        }
    }
    Ok(VerificationReport::new(format!("face exchange relation for {sigma}"), residual).with("scale", c(scale, 0.0)))
}

/// Largest difference between `T̃(l|u)` and its relabeled counterpart: the
/// twisted monodromy built with sites and inhomogeneities permuted by `σ`,
/// moved back to the original site order.
pub fn check_twisted_symmetry(
    sigma: &Permutation,
    l: WeightVector,
    u: C64,
    p: &ModelParams,
) -> Result<VerificationReport> {
    let t = twisted_monodromy(l, u, p)?;
    let xi: Vec<C64> = sigma.images().iter().map(|&k| p.xi[k]).collect();
    let q = p.with_xi(xi)?;
    let tq = twisted_monodromy(l, u, &q)?;
    let mut residual: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            residual = residual.max(max_norm_diff(
                t[i][j].matrix(),
                &relabel_sites(tq[i][j].matrix(), sigma),
            ));
        }
    }
    Ok(VerificationReport::new(
        format!("twisted monodromy symmetric under {sigma}"),
        residual,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::ParamSampler;

    fn draw(seed: u64, n: usize) -> (ModelParams, C64) {
        let mut s = ParamSampler::new(seed);
        let p = s.params(n);
        let u = s.complex();
        (p, u)
    }

    #[test]
    fn decomposition_is_minimal() {
        for n in 0..=4 {
            for sigma in Permutation::all(n) {
                assert!(sigma.is_minimal_decomposition(&sigma.decomposition()), "{sigma}");
            }
        }
    }

    #[test]
    fn permutation_rejects_repeats() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![1, 2]).is_err());
    }

    #[test]
    fn identity_r_sigma() {
        let (p, _) = draw(1, 3);
        let r = r_sigma(&Permutation::identity(3), p.lambda, &p).unwrap();
        assert_eq!(r.matrix(), &CMatrix::identity(8, 8));
    }

    #[test]
    fn f_matrix_n1_is_identity() {
        let (p, _) = draw(2, 1);
        assert_eq!(f_matrix(p.lambda, &p).unwrap().matrix(), &CMatrix::identity(2, 2));
    }

    #[test]
    fn f_matrix_lower_triangular() {
        for n in 2..=4 {
            let (p, _) = draw(3, n);
            let f = f_matrix(p.lambda, &p).unwrap();
            assert_eq!(f.upper_max(), 0.0, "n={n}");
            assert!(f.diagonal_min() >= GENERICITY_DELTA, "n={n}");
        }
    }

    #[test]
    fn factorizing_all_s3() {
        let (p, _) = draw(4, 3);
        for sigma in Permutation::all(3) {
            let r = check_factorizing(&sigma, p.lambda, &p).unwrap();
            assert!(r.passes(1e-10), "{sigma}: {}", r.residual);
        }
    }

    #[test]
    fn face_exchange_n2() {
        let (p, u) = draw(5, 2);
        let r = check_face_exchange(&Permutation::elementary(2, 0), p.lambda, u, &p).unwrap();
        assert!(r.passes(1e-10), "{}", r.residual);
    }

    #[test]
    fn twisted_closed_forms() {
        for n in 1..=3 {
            let (p, u) = draw(6, n);
            let t = twisted_monodromy(p.lambda, u, &p).unwrap();
            let t22 = twisted_t22_closed(p.lambda, u, &p).unwrap();
            let t21 = twisted_t21_closed(p.lambda, u, &p).unwrap();
            assert!(max_norm_diff(t[DOWN][DOWN].matrix(), t22.matrix()) < 1e-10, "n={n}");
            assert!(max_norm_diff(t[DOWN][UP].matrix(), t21.matrix()) < 1e-10, "n={n}");
        }
    }

    #[test]
    fn twisted_creation_matches_closed_form() {
        for n in 1..=3 {
            let (p, u) = draw(7, n);
            let x = twisted_creation(p.lambda, u, &p).unwrap();
            let y = twisted_creation_closed(p.lambda, u, &p).unwrap();
            assert!(max_norm_diff(&x, y.matrix()) < 1e-10 * max_norm(&x).max(1.0), "n={n}");
        }
    }
}
