//! The SOS (face) R-matrix, intertwiners and their duals, the face–vertex
//! correspondence, crossing, and the face-diagonal form of the K-matrix.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{c, embed_two, max_norm, max_norm_diff, spin_of, CMatrix, CVector};
use crate::report::VerificationReport;
use crate::trig::{nonzero, sin_nz, WeightVector, C64, DOWN, GENERICITY_DELTA, UP};
use crate::vertex::{k_matrix, r_matrix};

/// Dynamical R-matrix `R(u; m)`; entry `R^{kl}_{ij}` sits at row `2k+l`,
/// column `2i+j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceRMatrix {
    pub matrix: CMatrix,
}

impl FaceRMatrix {
    /// `R^{kl}_{ij}` (output `kl`, input `ij`).
    pub fn entry(&self, k: usize, l: usize, i: usize, j: usize) -> C64 {
        self.matrix[(2 * k + l, 2 * i + j)]
    }
}

pub fn sos_r_matrix(u: C64, m: WeightVector, eta: C64) -> Result<FaceRMatrix> {
    let d = sin_nz(u + eta, || "sin(u + eta) in R(u; m)".to_string())?;
    let s12 = sin_nz(m.m12(), || "sin(m_12) in R(u; m)".to_string())?;
    let mut r = CMatrix::zeros(4, 4);
    r[(0, 0)] = c(1.0, 0.0);
    r[(3, 3)] = c(1.0, 0.0);
    for (i, j) in [(UP, DOWN), (DOWN, UP)] {
        let mij = m.diff(i, j);
        let sij = if i == UP { s12 } else { -s12 };
        r[(2 * i + j, 2 * i + j)] = u.sin() * (mij - eta).sin() / (d * sij);
        r[(2 * j + i, 2 * i + j)] = eta.sin() * (u + mij).sin() / (d * sij);
    }
    Ok(FaceRMatrix { matrix: r })
}

/// `R_{a,b}(u; m − η Σ_{k ∈ shift_sites} h^{(k)})` on an `n`-site space.
///
/// The dynamical shift is read off the spins of `shift_sites` in each basis
/// vector; those sites are untouched by the operator, so the result is a
/// well-defined linear operator.
pub fn dynamical_two_site(
    u: C64,
    m: WeightVector,
    eta: C64,
    a: usize,
    b: usize,
    shift_sites: &[usize],
    n: usize,
) -> Result<CMatrix> {
    assert!(!shift_sites.contains(&a) && !shift_sites.contains(&b));
    let dim = 1usize << n;
    let mut cache: HashMap<usize, CMatrix> = HashMap::new();
    let mut out = CMatrix::zeros(dim, dim);
    let (ba, bb) = (n - 1 - a, n - 1 - b);
    for s in 0..dim {
        let ups = shift_sites.iter().filter(|&&k| spin_of(s, k, n) == UP).count();
        let r = match cache.get(&ups) {
            Some(r) => r,
            None => {
                let steps = 2 * ups as i64 - shift_sites.len() as i64;
                let w = m.shift(UP, steps, eta);
                cache.insert(ups, sos_r_matrix(u, w, eta)?.matrix);
                &cache[&ups]
            }
        };
        let col = 2 * ((s >> ba) & 1) + ((s >> bb) & 1);
        let rest = s & !(1 << ba) & !(1 << bb);
        for row in 0..4 {
            let v = r[(row, col)];
            if v != c(0.0, 0.0) {
                let t = rest | ((row >> 1) << ba) | ((row & 1) << bb);
                out[(t, s)] += v;
            }
        }
    }
    Ok(out)
}

fn dybe_residual(u1: C64, u2: C64, u3: C64, m: WeightVector, eta: C64, corrupt: bool) -> Result<f64> {
    let shift3: &[usize] = if corrupt { &[] } else { &[2] };
    let lhs = dynamical_two_site(u1 - u2, m, eta, 0, 1, shift3, 3)?
        * dynamical_two_site(u1 - u3, m, eta, 0, 2, &[], 3)?
        * dynamical_two_site(u2 - u3, m, eta, 1, 2, &[0], 3)?;
    let rhs = dynamical_two_site(u2 - u3, m, eta, 1, 2, &[], 3)?
        * dynamical_two_site(u1 - u3, m, eta, 0, 2, &[1], 3)?
        * dynamical_two_site(u1 - u2, m, eta, 0, 1, &[], 3)?;
    Ok(max_norm_diff(&lhs, &rhs))
}

/// Dynamical Yang–Baxter equation
/// `R₁₂(u₁₂; m−ηh⁽³⁾) R₁₃(u₁₃; m) R₂₃(u₂₃; m−ηh⁽¹⁾)
///  = R₂₃(u₂₃; m) R₁₃(u₁₃; m−ηh⁽²⁾) R₁₂(u₁₂; m)`.
pub fn check_dybe(u1: C64, u2: C64, u3: C64, m: WeightVector, eta: C64) -> Result<VerificationReport> {
    let residual = dybe_residual(u1, u2, u3, m, eta, false)?;
    Ok(VerificationReport::new("dynamical Yang-Baxter equation", residual)
        .with("u1", u1)
        .with("u2", u2)
        .with("u3", u3)
        .with("m1", m.m1())
        .with("m2", m.m2())
        .with("eta", eta))
}

/// Face unitarity `R₁₂(u; m) R₂₁(−u; m) = id`.
pub fn check_face_unitarity(u: C64, m: WeightVector, eta: C64) -> Result<VerificationReport> {
    let lhs =
        embed_two(&sos_r_matrix(u, m, eta)?.matrix, 0, 1, 2) * embed_two(&sos_r_matrix(-u, m, eta)?.matrix, 1, 0, 2);
    let residual = max_norm_diff(&lhs, &CMatrix::identity(4, 4));
    Ok(VerificationReport::new("face unitarity", residual)
        .with("u", u)
        .with("m1", m.m1())
        .with("m2", m.m2())
        .with("eta", eta))
}

/// Weight conservation: `[R(u; m), h⁽¹⁾ + h⁽²⁾] = 0`.
pub fn check_conservation(u: C64, m: WeightVector, eta: C64) -> Result<VerificationReport> {
    let r = sos_r_matrix(u, m, eta)?.matrix;
    // First component of ĥ₁ + ĥ₂ summed over both sites.
    let h = CMatrix::from_diagonal(&CVector::from_fn(4, |s, _| {
        let w = |b: usize| if b == UP { 0.5 } else { -0.5 };
        c(w(s >> 1) + w(s & 1), 0.0)
    }));
    let residual = max_norm(&(&r * &h - &h * &r));
    Ok(VerificationReport::new("weight conservation", residual)
        .with("u", u)
        .with("m1", m.m1())
        .with("m2", m.m2())
        .with("eta", eta))
}

const EPS: [f64; 2] = [1.0, -1.0];

fn bar(i: usize) -> usize {
    1 - i
}

fn crossing_residual(u: C64, m: WeightVector, eta: C64, eps: [f64; 2]) -> Result<f64> {
    let r = sos_r_matrix(u, m, eta)?;
    let d = sin_nz(u + eta, || "sin(u + eta) in crossing".to_string())? * m.m21().sin();
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let mi = m.shift(i, 1, eta);
        let rc = sos_r_matrix(-u - eta, mi, eta)?;
        let scale = u.sin() * mi.m21().sin() / d;
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let lhs = r.entry(k, l, i, j);
                    let rhs = eps[l] * eps[j] * scale * rc.entry(bar(j), k, bar(l), i);
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Crossing relation
/// `R(u;m)^{kl}_{ij} = ε_l ε_j · sin u · sin((m−ηĥ_i)₂₁) / (sin(u+η) sin m₂₁)
///  · R(−u−η; m−ηĥ_i)^{j̄ k}_{l̄ i}` with `ε = (1, −1)` and `ī` the flipped index.
pub fn check_crossing(u: C64, m: WeightVector, eta: C64) -> Result<VerificationReport> {
    let residual = crossing_residual(u, m, eta, EPS)?;
    Ok(VerificationReport::new("crossing relation", residual)
        .with("u", u)
        .with("m1", m.m1())
        .with("m2", m.m2())
        .with("eta", eta))
}

/// Intertwiner `φ_{m, m−ηĥ_j}(u) = (e^{−i(u+2m_j)}, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intertwiner {
    pub components: [C64; 2],
    pub label: usize,
    pub weight: WeightVector,
    pub u: C64,
}

impl Intertwiner {
    pub fn vector(&self) -> CVector {
        CVector::from_vec(self.components.to_vec())
    }
}

pub fn intertwiner(m: WeightVector, j: usize, u: C64) -> Intertwiner {
    let i = c(0.0, 1.0);
    Intertwiner {
        components: [(-i * (u + 2.0 * m.component(j))).exp(), c(1.0, 0.0)],
        label: j,
        weight: m,
        u,
    }
}

/// Dual intertwiners at `(m, u)`.
///
/// `bar[μ]` is `φ̄_{m, m−ηĥ_μ}(u)` and `tilde[μ]` is `φ̃_{m+ηĥ_μ, m}(u)`; both
/// are rows of the inverse of the corresponding 2×2 column assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualIntertwiners {
    pub bar: [[C64; 2]; 2],
    pub tilde: [[C64; 2]; 2],
}

fn invert_columns(cols: [[C64; 2]; 2], what: &str) -> Result<[[C64; 2]; 2]> {
    let (a, b) = (cols[0], cols[1]);
    // Assembly A = [a b] (columns); det = a0 b1 − b0 a1.
    let det = a[0] * b[1] - b[0] * a[1];
    if det.norm() < GENERICITY_DELTA {
        return Err(Error::DegenerateIntertwiner {
            what: what.to_string(),
            modulus: det.norm(),
        });
    }
    Ok([[b[1] / det, -b[0] / det], [-a[1] / det, a[0] / det]])
}

pub fn dual_intertwiners(m: WeightVector, u: C64, eta: C64) -> Result<DualIntertwiners> {
    let bar = invert_columns(
        [intertwiner(m, UP, u).components, intertwiner(m, DOWN, u).components],
        "phi-bar assembly",
    )?;
    let tilde = invert_columns(
        [
            intertwiner(m.shift(UP, -1, eta), UP, u).components,
            intertwiner(m.shift(DOWN, -1, eta), DOWN, u).components,
        ],
        "phi-tilde assembly",
    )?;
    Ok(DualIntertwiners { bar, tilde })
}

/// `φ̃_{m+ηĥ_μ, m}(u)` as a row.
pub fn phi_tilde(m: WeightVector, mu: usize, u: C64, eta: C64) -> Result<[C64; 2]> {
    Ok(dual_intertwiners(m, u, eta)?.tilde[mu])
}

/// `φ̄_{m, m−ηĥ_μ}(u)` as a row.
pub fn phi_bar(m: WeightVector, mu: usize, u: C64, eta: C64) -> Result<[C64; 2]> {
    Ok(dual_intertwiners(m, u, eta)?.bar[mu])
}

fn kron2(a: [C64; 2], b: [C64; 2]) -> CVector {
    CVector::from_vec(vec![a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
}

/// Face–vertex correspondence
/// `R̄₁₂(u₁−u₂) φ_{m,m−ηĥ_i}(u₁) ⊗ φ_{m−ηĥ_i,m−ηĥ_i−ηĥ_j}(u₂)
///  = Σ_{k,l} R(u₁−u₂; m)^{kl}_{ij} φ_{m−ηĥ_l,m−ηĥ_l−ηĥ_k}(u₁) ⊗ φ_{m,m−ηĥ_l}(u₂)`.
pub fn check_face_vertex(
    u1: C64,
    u2: C64,
    m: WeightVector,
    i: usize,
    j: usize,
    eta: C64,
) -> Result<VerificationReport> {
    let rv = r_matrix(u1 - u2, eta)?.matrix();
    let rf = sos_r_matrix(u1 - u2, m, eta)?;
    let lhs = rv
        * kron2(
            intertwiner(m, i, u1).components,
            intertwiner(m.shift(i, 1, eta), j, u2).components,
        );
    let mut rhs = CVector::zeros(4);
    for k in 0..2 {
        for l in 0..2 {
            let w = rf.entry(k, l, i, j);
            if w != c(0.0, 0.0) {
                rhs += kron2(
                    intertwiner(m.shift(l, 1, eta), k, u1).components,
                    intertwiner(m, l, u2).components,
                ) * w;
            }
        }
    }
    let residual = (lhs - rhs).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    Ok(
        VerificationReport::new(format!("face-vertex correspondence ({}, {})", i + 1, j + 1), residual)
            .with("u1", u1)
            .with("u2", u2)
            .with("m1", m.m1())
            .with("m2", m.m2())
            .with("eta", eta),
    )
}

/// Diagonal face K-matrix `k_i = sin(λ_i+ζ−u) / sin(λ_i+ζ+u)`.
pub fn face_k_matrix(lambda: WeightVector, u: C64, zeta: C64) -> Result<[C64; 2]> {
    let mut k = [c(0.0, 0.0); 2];
    for (i, ki) in k.iter_mut().enumerate() {
        let li = lambda.component(i);
        let d = nonzero((li + zeta + u).sin(), GENERICITY_DELTA, || {
            format!("sin(lambda_{} + zeta + u) in face K", i + 1)
        })?;
        *ki = (li + zeta - u).sin() / d;
    }
    Ok(k)
}

/// `K(u)^s_t = Σ_{i,j} φ_{λ−η(ĥ_i−ĥ_j), λ−ηĥ_i}(u)^s 𝒦(λ|u)^j_i φ̄_{λ,λ−ηĥ_i}(−u)_t`.
fn k_from_face(u: C64, lambda: WeightVector, zeta: C64, eta: C64) -> Result<CMatrix> {
    let kd = face_k_matrix(lambda, u, zeta)?;
    let duals = dual_intertwiners(lambda, -u, eta)?;
    let mut k = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let kij = if i == j { kd[i] } else { c(0.0, 0.0) };
            if kij == c(0.0, 0.0) {
                continue;
            }
            // φ_{a, a−ηĥ_j} with a = λ − η(ĥ_i − ĥ_j) ends at λ − ηĥ_i.
            let a = lambda.shift(i, 1, eta).shift(j, -1, eta);
            let phi = intertwiner(a, j, u).components;
            let dual = duals.bar[i];
            for s in 0..2 {
                for t in 0..2 {
                    k[(s, t)] += phi[s] * kij * dual[t];
                }
            }
        }
    }
    Ok(k)
}

pub fn check_k_face_vertex(u: C64, lambda: WeightVector, zeta: C64, eta: C64) -> Result<VerificationReport> {
    let rec = k_from_face(u, lambda, zeta, eta)?;
    let k = k_matrix(u, lambda, zeta)?.matrix();
    Ok(
        VerificationReport::new("K-matrix face reconstruction", max_norm_diff(&rec, &k))
            .with("u", u)
            .with("lambda_1", lambda.m1())
            .with("lambda_2", lambda.m2())
            .with("zeta", zeta)
            .with("eta", eta),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::ParamSampler;
    use crate::vertex::{k_matrix_variant, permutation4, KMatrixVariant};

    fn draw(seed: u64) -> (ParamSampler, WeightVector, C64) {
        let mut s = ParamSampler::new(seed);
        let eta = s.complex();
        let m = WeightVector::new(s.complex(), s.complex());
        (s, m, eta)
    }

    #[test]
    fn sos_at_zero_is_permutation() {
        let (_, m, eta) = draw(1);
        let r = sos_r_matrix(c(0.0, 0.0), m, eta).unwrap();
        assert!(max_norm_diff(&r.matrix, &permutation4()) < 1e-14);
    }

    #[test]
    fn sos_guards() {
        let (_, m, eta) = draw(2);
        assert!(sos_r_matrix(-eta, m, eta).is_err());
        let degenerate = WeightVector::new(m.m1(), m.m1());
        assert!(sos_r_matrix(c(0.3, 0.1), degenerate, eta).is_err());
    }

    #[test]
    fn dybe_and_its_corruption() {
        let (mut s, m, eta) = draw(3);
        let (u1, u2, u3) = (s.complex(), s.complex(), s.complex());
        assert!(check_dybe(u1, u2, u3, m, eta).unwrap().passes(1e-12));
        assert!(check_dybe(u1, u1, u3, m, eta).unwrap().passes(1e-12));
        assert!(dybe_residual(u1, u2, u3, m, eta, true).unwrap() > 1e-8);
    }

    #[test]
    fn crossing_and_flipped_sign() {
        let (mut s, m, eta) = draw(4);
        let u = s.complex();
        assert!(check_crossing(u, m, eta).unwrap().passes(1e-12));
        assert!(crossing_residual(u, m, eta, [1.0, 1.0]).unwrap() > 1e-8);
    }

    #[test]
    fn unitarity_and_conservation() {
        let (mut s, m, eta) = draw(5);
        let u = s.complex();
        assert!(check_face_unitarity(u, m, eta).unwrap().passes(1e-12));
        assert_eq!(check_conservation(u, m, eta).unwrap().residual, 0.0);
    }

    #[test]
    fn intertwiner_examples() {
        let z = c(0.0, 0.0);
        let m = WeightVector::new(z, c(0.3, 0.1));
        assert_eq!(intertwiner(m, UP, z).components, [c(1.0, 0.0), c(1.0, 0.0)]);
        let same = WeightVector::new(c(0.2, 0.1), c(0.2, 0.1));
        assert_eq!(
            intertwiner(same, UP, c(0.4, 0.0)).components,
            intertwiner(same, DOWN, c(0.4, 0.0)).components
        );
        assert!(dual_intertwiners(same, c(0.4, 0.0), c(0.3, 0.0)).is_err());
        let (mut s, m, _) = draw(6);
        let u = s.complex();
        let i = c(0.0, 1.0);
        let a = intertwiner(m, UP, u).components;
        let b = intertwiner(m, DOWN, u).components;
        let det = a[0] * b[1] - b[0] * a[1];
        let expect = (-i * u).exp() * ((-2.0 * i * m.m1()).exp() - (-2.0 * i * m.m2()).exp());
        assert!((det - expect).norm() < 1e-14);
    }

    #[test]
    fn biorthogonality_and_completeness() {
        let (mut s, m, eta) = draw(7);
        let u = s.complex();
        let d = dual_intertwiners(m, u, eta).unwrap();
        let dot = |r: [C64; 2], v: [C64; 2]| r[0] * v[0] + r[1] * v[1];
        let mut bar_sum = CMatrix::zeros(2, 2);
        let mut tilde_sum = CMatrix::zeros(2, 2);
        for mu in 0..2 {
            for nu in 0..2 {
                let delta = if mu == nu { 1.0 } else { 0.0 };
                let pb = dot(d.bar[mu], intertwiner(m, nu, u).components);
                let pt = dot(d.tilde[mu], intertwiner(m.shift(nu, -1, eta), nu, u).components);
                assert!((pb - delta).norm() < 1e-14);
                assert!((pt - delta).norm() < 1e-14);
            }
            let phi = intertwiner(m, mu, u).components;
            let phit = intertwiner(m.shift(mu, -1, eta), mu, u).components;
            for a in 0..2 {
                for b in 0..2 {
                    bar_sum[(a, b)] += phi[a] * d.bar[mu][b];
                    tilde_sum[(a, b)] += phit[a] * d.tilde[mu][b];
                }
            }
        }
        assert!(max_norm_diff(&bar_sum, &CMatrix::identity(2, 2)) < 1e-12);
        assert!(max_norm_diff(&tilde_sum, &CMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn face_vertex_examples() {
        let (mut s, m, eta) = draw(8);
        let (u1, u2) = (s.complex(), s.complex());
        for i in 0..2 {
            for j in 0..2 {
                assert!(check_face_vertex(u1, u2, m, i, j, eta).unwrap().passes(1e-12));
            }
            assert!(check_face_vertex(u1, u1, m, i, i, eta).unwrap().passes(1e-13));
        }
        for i in 0..2 {
            for j in 0..2 {
                let r = check_face_vertex(u1, u2, m, i, j, c(1e-10, 0.0)).unwrap();
                assert!(r.passes(1e-9));
            }
        }
    }

    #[test]
    fn face_k_examples() {
        let (mut s, lam, eta) = draw(9);
        let zeta = s.complex();
        assert_eq!(face_k_matrix(lam, c(0.0, 0.0), zeta).unwrap(), [c(1.0, 0.0); 2]);
        assert!(face_k_matrix(lam, -(lam.m1() + zeta), zeta).is_err());
        let u = s.complex();
        let k = face_k_matrix(lam, u, zeta).unwrap();
        assert!((k[0].norm() - 1.0).abs() > 1e-6 && (k[1].norm() - 1.0).abs() > 1e-6);
        assert!(check_k_face_vertex(c(0.0, 0.0), lam, zeta, eta).unwrap().passes(1e-12));
        assert!(check_k_face_vertex(u, lam, zeta, eta).unwrap().passes(1e-10));
    }

    #[test]
    fn k_reconstruction_detects_one_sided_zeta_shift() {
        let (mut s, lam, eta) = draw(10);
        let zeta = s.complex();
        let u = s.complex();
        let rec = k_from_face(u, lam, zeta + 0.01, eta).unwrap();
        let k = k_matrix(u, lam, zeta).unwrap().matrix();
        assert!(max_norm_diff(&rec, &k) > 1e-6);
    }

    #[test]
    fn printed_k_diagonal_is_not_reconstructed() {
        let (mut s, lam, eta) = draw(11);
        let zeta = s.complex();
        let u = s.complex();
        let rec = k_from_face(u, lam, zeta, eta).unwrap();
        let printed = k_matrix_variant(u, lam, zeta, KMatrixVariant::Printed)
            .unwrap()
            .matrix();
        assert!(max_norm_diff(&rec, &printed) > 1e-3);
    }
}
