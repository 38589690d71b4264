//! Complex parameters, weight vectors, genericity guards and seeded sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default threshold below which a denominator counts as vanishing.
pub const GENERICITY_DELTA: f64 = 1e-8;

/// Basis index of the up state ε₁ (label 1 in the usual notation).
pub const UP: usize = 0;
/// Basis index of the down state ε₂ (label 2 in the usual notation).
pub const DOWN: usize = 1;

pub fn complex_sin(z: C64) -> C64 {
    z.sin()
}

/// Returns `Err(Singular)` if `|value| < delta`; the name is built lazily.
pub(crate) fn nonzero<F: FnOnce() -> String>(value: C64, delta: f64, name: F) -> Result<C64> {
    let modulus = value.norm();
    if modulus < delta || !modulus.is_finite() {
        Err(Error::singular(name(), modulus))
    } else {
        Ok(value)
    }
}

/// `sin(x)` checked against the default genericity threshold.
pub(crate) fn sin_nz<F: FnOnce() -> String>(x: C64, name: F) -> Result<C64> {
    nonzero(x.sin(), GENERICITY_DELTA, name)
}

/// Plain serialization form of a complex number: `{"re": …, "im": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexRecord {
    fn from(z: C64) -> Self {
        ComplexRecord { re: z.re, im: z.im }
    }
}

impl From<ComplexRecord> for C64 {
    fn from(r: ComplexRecord) -> Self {
        C64::new(r.re, r.im)
    }
}

/// A vector `m = (m₁, m₂)` of the two-dimensional weight space.
///
/// The vector is kept as a base point plus an integer number of `−η·ĥ₁`
/// steps, so composing shifts is exact integer arithmetic: shifting by `a`
/// then `b` steps is bit-identical to shifting by `a + b`, and `ĥ₁ + ĥ₂ = 0`
/// cancels exactly. Components are materialized on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector {
    base: [C64; 2],
    /// Net number of `−η·ĥ₁` shifts applied to `base`.
    steps: i64,
    eta: C64,
}

impl WeightVector {
    pub fn new(m1: C64, m2: C64) -> Self {
        WeightVector {
            base: [m1, m2],
            steps: 0,
            eta: C64::new(0.0, 0.0),
        }
    }

    /// `m₁`.
    pub fn m1(&self) -> C64 {
        self.component(0)
    }

    /// `m₂`.
    pub fn m2(&self) -> C64 {
        self.component(1)
    }

    /// Component `i` (0 ↔ m₁, 1 ↔ m₂).
    pub fn component(&self, i: usize) -> C64 {
        if self.steps == 0 {
            return self.base[i];
        }
        let half = self.eta * (0.5 * self.steps as f64);
        match i {
            0 => self.base[0] - half,
            1 => self.base[1] + half,
            _ => panic!("weight component index {i} out of range"),
        }
    }

    pub fn components(&self) -> [C64; 2] {
        [self.m1(), self.m2()]
    }

    /// `m_ij = m_i − m_j`.
    pub fn diff(&self, i: usize, j: usize) -> C64 {
        self.component(i) - self.component(j)
    }

    pub fn m12(&self) -> C64 {
        self.diff(0, 1)
    }

    pub fn m21(&self) -> C64 {
        self.diff(1, 0)
    }

    /// `m − steps·η·ĥ_direction`, with direction 0 ↔ ĥ₁ = (½, −½) and
    /// direction 1 ↔ ĥ₂ = (−½, ½).
    pub fn shift(&self, direction: usize, steps: i64, eta: C64) -> Self {
        assert!(direction < 2, "shift direction {direction} out of range");
        let signed = if direction == UP { steps } else { -steps };
        if signed == 0 {
            return *self;
        }
        let mut out = if self.steps == 0 || self.eta == eta {
            *self
        } else {
            // Different η: fold the pending shift into the base first.
            WeightVector::new(self.m1(), self.m2())
        };
        out.eta = eta;
        out.steps += signed;
        if out.steps == 0 {
            out.eta = C64::new(0.0, 0.0);
        }
        out
    }

    /// `m − η·Σ_k ĥ_{s_k}` for a spin configuration `s` (entries UP/DOWN).
    pub fn shift_by_spins(&self, spins: &[usize], eta: C64) -> Self {
        let ups = spins.iter().filter(|&&s| s == UP).count() as i64;
        let downs = spins.len() as i64 - ups;
        self.shift(UP, ups - downs, eta)
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// `m − steps·η·ĥ_direction`.
pub fn weight_shift(m: WeightVector, direction: usize, steps: i64, eta: C64) -> WeightVector {
    m.shift(direction, steps, eta)
}

impl Serialize for WeightVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [ComplexRecord::from(self.m1()), ComplexRecord::from(self.m2())].serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[ComplexRecord; 2]>::deserialize(d)?;
        Ok(WeightVector::new(a.into(), b.into()))
    }
}

/// Model parameters: crossing parameter η, boundary parameters ζ and λ,
/// spectral parameters `u` and inhomogeneities `xi`, lattice size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRecord", into = "ParamsRecord")]
pub struct ModelParams {
    pub n: usize,
    pub eta: C64,
    pub zeta: C64,
    pub lambda: WeightVector,
    pub u: Vec<C64>,
    pub xi: Vec<C64>,
}

/// On-disk form of [`ModelParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub n: usize,
    pub eta: ComplexRecord,
    pub zeta: ComplexRecord,
    pub lambda: [ComplexRecord; 2],
    pub u: Vec<ComplexRecord>,
    pub xi: Vec<ComplexRecord>,
}

impl TryFrom<ParamsRecord> for ModelParams {
    type Error = Error;

    fn try_from(r: ParamsRecord) -> Result<Self> {
        ModelParams::new(
            r.n,
            r.eta.into(),
            r.zeta.into(),
            WeightVector::new(r.lambda[0].into(), r.lambda[1].into()),
            r.u.into_iter().map(C64::from).collect(),
            r.xi.into_iter().map(C64::from).collect(),
        )
    }
}

impl From<ModelParams> for ParamsRecord {
    fn from(p: ModelParams) -> Self {
        ParamsRecord {
            n: p.n,
            eta: p.eta.into(),
            zeta: p.zeta.into(),
            lambda: [p.lambda.m1().into(), p.lambda.m2().into()],
            u: p.u.iter().map(|&z| z.into()).collect(),
            xi: p.xi.iter().map(|&z| z.into()).collect(),
        }
    }
}

impl ModelParams {
    pub fn new(n: usize, eta: C64, zeta: C64, lambda: WeightVector, u: Vec<C64>, xi: Vec<C64>) -> Result<Self> {
        if u.len() != n {
            return Err(Error::LengthMismatch {
                field: "u",
                n,
                len: u.len(),
            });
        }
        if xi.len() != n {
            return Err(Error::LengthMismatch {
                field: "xi",
                n,
                len: xi.len(),
            });
        }
        let p = ModelParams {
            n,
            eta,
            zeta,
            lambda,
            u,
            xi,
        };
        if !p.is_finite() {
            return Err(Error::InvalidArgument("parameters must be finite".to_string()));
        }
        Ok(p)
    }

    pub fn is_finite(&self) -> bool {
        let fin = |z: &C64| z.re.is_finite() && z.im.is_finite();
        fin(&self.eta)
            && fin(&self.zeta)
            && self.lambda.is_finite()
            && self.u.iter().all(fin)
            && self.xi.iter().all(fin)
    }

    /// Same parameters with `u` replaced.
    pub fn with_u(&self, u: Vec<C64>) -> Result<Self> {
        ModelParams::new(self.n, self.eta, self.zeta, self.lambda, u, self.xi.clone())
    }

    /// Same parameters with `xi` replaced.
    pub fn with_xi(&self, xi: Vec<C64>) -> Result<Self> {
        ModelParams::new(self.n, self.eta, self.zeta, self.lambda, self.u.clone(), xi)
    }

    /// The first `k` spectral parameters and inhomogeneities.
    pub fn truncated(&self, k: usize) -> Self {
        assert!(k <= self.n);
        ModelParams {
            n: k,
            eta: self.eta,
            zeta: self.zeta,
            lambda: self.lambda,
            u: self.u[..k].to_vec(),
            xi: self.xi[..k].to_vec(),
        }
    }

    /// Runs the genericity guard at threshold `delta` and converts the first
    /// violation into an error.
    pub fn ensure_generic(&self, delta: f64) -> Result<()> {
        let report = genericity_guard(self, delta);
        match report.violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::Singular {
                what: v.condition,
                modulus: v.modulus,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardViolation {
    pub condition: String,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardReport {
    pub delta: f64,
    pub violations: Vec<GuardViolation>,
}

impl GuardReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every denominator of the model formulas against `delta`.
///
/// Covers the vertex and face R-matrices at all weights `λ + kη ĥ₁` that the
/// lattice constructions visit, the K-matrix, the intertwiner inversions, the
/// symmetric sum, the determinant kernel and its Vandermonde-type
/// denominators, and the prefactor. Indices in condition names are 1-based.
pub fn genericity_guard(p: &ModelParams, delta: f64) -> GuardReport {
    assert!(delta > 0.0, "delta must be positive");
    let mut violations = Vec::new();
    let mut check = |value: C64, name: &dyn Fn() -> String| {
        let modulus = value.norm();
        if !(modulus >= delta) {
            violations.push(GuardViolation {
                condition: name(),
                modulus,
            });
        }
    };
    let n = p.n;
    let eta = p.eta;
    let (l1, l2) = (p.lambda.m1(), p.lambda.m2());
    let l12 = l1 - l2;
    let z = p.zeta;

    check(eta.sin(), &|| "sin(eta)".to_string());
    let reach = n as i64 + 2;
    for k in -reach..=reach {
        check((l12 + eta * k as f64).sin(), &|| format!("sin(lambda_12 + ({k})*eta)"));
    }
    for (a, &ua) in p.u.iter().enumerate() {
        let a1 = a + 1;
        check((l1 + z + ua).sin(), &|| format!("sin(lambda_1 + zeta + u_{a1})"));
        check((l2 + z + ua).sin(), &|| format!("sin(lambda_2 + zeta + u_{a1})"));
        check((2.0 * ua).sin(), &|| format!("sin(2*u_{a1})"));
        for (j, &xj) in p.xi.iter().enumerate() {
            let j1 = j + 1;
            check((ua - xj).sin(), &|| format!("sin(u_{a1} - xi_{j1})"));
            check((ua + xj).sin(), &|| format!("sin(u_{a1} + xi_{j1})"));
            check((ua - xj + eta).sin(), &|| format!("sin(u_{a1} - xi_{j1} + eta)"));
            check((ua + xj + eta).sin(), &|| format!("sin(u_{a1} + xi_{j1} + eta)"));
        }
        for (b, &ub) in p.u.iter().enumerate().skip(a + 1) {
            let b1 = b + 1;
            check((ua - ub).sin(), &|| format!("sin(u_{a1} - u_{b1})"));
            check((ua + ub + eta).sin(), &|| format!("sin(u_{a1} + u_{b1} + eta)"));
        }
    }
    for (i, &xi) in p.xi.iter().enumerate() {
        let i1 = i + 1;
        check((l1 + z - xi).sin(), &|| format!("sin(lambda_1 + zeta - xi_{i1})"));
        check((l2 + z + xi).sin(), &|| format!("sin(lambda_2 + zeta + xi_{i1})"));
        for (j, &xj) in p.xi.iter().enumerate().skip(i + 1) {
            let j1 = j + 1;
            check((xi - xj).sin(), &|| format!("sin(xi_{i1} - xi_{j1})"));
            check((xi + xj).sin(), &|| format!("sin(xi_{i1} + xi_{j1})"));
            check((xi - xj + eta).sin(), &|| format!("sin(xi_{i1} - xi_{j1} + eta)"));
            check((xj - xi + eta).sin(), &|| format!("sin(xi_{j1} - xi_{i1} + eta)"));
        }
    }
    GuardReport { delta, violations }
}

/// Seeded generator of generic parameter draws.
///
/// Uses ChaCha8 seeded from a `u64`. Every complex number has its real part
/// uniform in `[−π/2, π/2]` and its imaginary part uniform in `[0.1, 0.5]`.
/// Parameters are drawn in the order η, ζ, λ₁, λ₂, u₁..u_N, ξ₁..ξ_N, and a
/// whole draw is repeated if it fails the genericity guard.
#[derive(Debug, Clone)]
pub struct ParamSampler {
    rng: ChaCha8Rng,
    redraws: u64,
}

impl ParamSampler {
    pub fn new(seed: u64) -> Self {
        ParamSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            redraws: 0,
        }
    }

    /// Number of draws rejected by the genericity guard so far.
    pub fn redraws(&self) -> u64 {
        self.redraws
    }

    pub fn complex(&mut self) -> C64 {
        let re = self.rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
        let im = self.rng.random_range(0.1..=0.5);
        C64::new(re, im)
    }

    pub fn params(&mut self, n: usize) -> ModelParams {
        loop {
            let eta = self.complex();
            let zeta = self.complex();
            let l1 = self.complex();
            let l2 = self.complex();
            let u: Vec<C64> = (0..n).map(|_| self.complex()).collect();
            let xi: Vec<C64> = (0..n).map(|_| self.complex()).collect();
            let p = ModelParams::new(n, eta, zeta, WeightVector::new(l1, l2), u, xi)
                .expect("lengths match by construction");
            if genericity_guard(&p, GENERICITY_DELTA).passed() {
                return p;
            }
            self.redraws += 1;
        }
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// A uniformly random permutation of `0..n` (Fisher–Yates).
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.rng.random_range(0..=i);
            v.swap(i, j);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sin_examples() {
        assert_eq!(complex_sin(c(0.0, 0.0)), c(0.0, 0.0));
        assert!((complex_sin(c(FRAC_PI_2, 0.0)) - c(1.0, 0.0)).norm() < 1e-16);
        // Exponential-definition oracle: sin z = (e^{iz} − e^{−iz}) / 2i.
        let z = c(0.0, 1.0);
        let i = c(0.0, 1.0);
        let oracle = ((i * z).exp() - (-i * z).exp()) / (2.0 * i);
        assert!((complex_sin(z) - oracle).norm() < 1e-15);
        assert!((complex_sin(z) - c(0.0, 1.0f64.sinh())).norm() < 1e-15);
    }

    #[test]
    fn shift_examples() {
        let eta = c(0.4, 0.0);
        let m = WeightVector::new(c(0.3, 0.0), c(0.1, 0.0));
        assert_eq!(weight_shift(m, UP, 0, eta), m);
        let back = m.shift(UP, 1, eta).shift(DOWN, 1, eta);
        assert_eq!(back.components(), m.components());
        let m2 = m.shift(UP, 2, eta);
        assert!((m.m12() - c(0.2, 0.0)).norm() < 1e-15);
        assert!((m2.m12() - c(-0.6, 0.0)).norm() < 1e-15);
        assert!((m.shift(DOWN, 1, eta).m12() - (m.m12() + eta)).norm() < 1e-15);
    }

    #[test]
    fn shift_with_new_eta_folds_pending_steps() {
        let m = WeightVector::new(c(0.3, 0.1), c(0.1, -0.2));
        let a = c(0.4, 0.1);
        let b = c(-0.2, 0.3);
        let s = m.shift(UP, 1, a).shift(DOWN, 2, b);
        let expect1 = m.m1() - a * 0.5 + b;
        let expect2 = m.m2() + a * 0.5 - b;
        assert!((s.m1() - expect1).norm() < 1e-15);
        assert!((s.m2() - expect2).norm() < 1e-15);
    }

    #[test]
    fn guard_examples() {
        let mut s = ParamSampler::new(7);
        let p = s.params(2);
        assert!(genericity_guard(&p, GENERICITY_DELTA).passed());

        let mut q = p.clone();
        q.xi[1] = q.xi[0];
        let r = genericity_guard(&q, GENERICITY_DELTA);
        assert!(r.violations.iter().any(|v| v.condition == "sin(xi_1 - xi_2)"));

        let mut q = p.clone();
        q.u[0] = q.xi[0] - q.eta;
        let r = genericity_guard(&q, GENERICITY_DELTA);
        assert!(r.violations.iter().any(|v| v.condition == "sin(u_1 - xi_1 + eta)"));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let z = c(0.1, 0.2);
        let e = ModelParams::new(1, z, z, WeightVector::new(z, -z), vec![z, z], vec![z]);
        assert!(matches!(e, Err(Error::LengthMismatch { field: "u", .. })));
    }

    #[test]
    fn sampler_is_reproducible() {
        let a = ParamSampler::new(42).params(3);
        let b = ParamSampler::new(42).params(3);
        assert_eq!(a, b);
        for z in a.u.iter().chain(a.xi.iter()) {
            assert!(z.re.abs() <= FRAC_PI_2 && (0.1..=0.5).contains(&z.im));
        }
    }

    #[test]
    fn params_roundtrip_through_record() {
        let p = ParamSampler::new(3).params(2);
        let r = ParamsRecord::from(p.clone());
        let q = ModelParams::try_from(r).unwrap();
        assert_eq!(p, q);
    }
}
