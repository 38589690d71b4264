//! The six-vertex R-matrix, the non-diagonal K-matrix and the vertex-picture
//! integrability identities.

use crate::error::Result;
use crate::linalg::{c, embed_one, embed_two, max_norm_diff, CMatrix};
use crate::report::VerificationReport;
use crate::trig::{sin_nz, ModelParams, WeightVector, C64};

/// Six-vertex R-matrix with weights `a = 1`, `b(u)`, `c(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMatrix4 {
    pub b: C64,
    pub c: C64,
}

impl RMatrix4 {
    pub fn a(&self) -> C64 {
        c(1.0, 0.0)
    }

    /// Dense 4×4 form in the flat basis `2·i₁ + i₂`.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = self.a();
        m[(3, 3)] = self.a();
        m[(1, 1)] = self.b;
        m[(2, 2)] = self.b;
        m[(1, 2)] = self.c;
        m[(2, 1)] = self.c;
        m
    }
}

pub fn r_matrix(u: C64, eta: C64) -> Result<RMatrix4> {
    let d = sin_nz(u + eta, || "sin(u + eta) in R(u)".to_string())?;
    Ok(RMatrix4 {
        b: u.sin() / d,
        c: eta.sin() / d,
    })
}

/// The 4×4 site permutation `P`.
pub fn permutation4() -> CMatrix {
    let mut p = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            p[(2 * j + i, 2 * i + j)] = c(1.0, 0.0);
        }
    }
    p
}

/// Which diagonal of the K-matrix to use.
///
/// `Corrected` is the default everywhere. `Printed` keeps the diagonal
/// entries in the form in which they are usually quoted; they satisfy the
/// reflection equation but are not reproduced by the face-picture
/// diagonalization, and they are kept only so that discrepancy can be shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KMatrixVariant {
    #[default]
    Corrected,
    Printed,
}

/// Non-diagonal 2×2 reflection matrix; `entries[s][t]` is `k^s_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMatrix2 {
    pub entries: [[C64; 2]; 2],
}

impl KMatrix2 {
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_fn(2, 2, |s, t| self.entries[s][t])
    }

    pub fn det(&self) -> C64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }
}

pub fn k_matrix(u: C64, lambda: WeightVector, zeta: C64) -> Result<KMatrix2> {
    k_matrix_variant(u, lambda, zeta, KMatrixVariant::Corrected)
}

pub fn k_matrix_variant(u: C64, lambda: WeightVector, zeta: C64, variant: KMatrixVariant) -> Result<KMatrix2> {
    let (l1, l2) = (lambda.m1(), lambda.m2());
    let d1 = sin_nz(l1 + zeta + u, || "sin(lambda_1 + zeta + u) in K(u)".to_string())?;
    let d2 = sin_nz(l2 + zeta + u, || "sin(lambda_2 + zeta + u) in K(u)".to_string())?;
    let d = 2.0 * d1 * d2;
    let i = c(0.0, 1.0);
    let e2 = (-2.0 * i * u).exp();
    let cd = (l1 - l2).cos();
    let cs = (l1 + l2 + 2.0 * zeta).cos();
    let (k11, k22) = match variant {
        KMatrixVariant::Corrected => ((cd - cs * e2) / d, (cd * e2 - cs) / d),
        KMatrixVariant::Printed => ((2.0 * cd - cs * e2) / (2.0 * d), (2.0 * cd * e2 - cs) / (2.0 * d)),
    };
    let s2u = (2.0 * u).sin();
    let phase = (-i * u).exp();
    let k12 = -i * s2u * (-i * (l1 + l2)).exp() * phase / d;
    let k21 = i * s2u * (i * (l1 + l2)).exp() * phase / d;
    Ok(KMatrix2 {
        entries: [[k11, k12], [k21, k22]],
    })
}

/// Max-norm residual of the quantum Yang–Baxter equation
/// `R₁₂(u₁−u₂) R₁₃(u₁−u₃) R₂₃(u₂−u₃) = R₂₃ R₁₃ R₁₂` for an R-matrix family.
pub fn qybe_residual<F>(r: F, u1: C64, u2: C64, u3: C64) -> Result<f64>
where
    F: Fn(C64) -> Result<CMatrix>,
{
    let r12 = embed_two(&r(u1 - u2)?, 0, 1, 3);
    let r13 = embed_two(&r(u1 - u3)?, 0, 2, 3);
    let r23 = embed_two(&r(u2 - u3)?, 1, 2, 3);
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    Ok(max_norm_diff(&lhs, &rhs))
}

pub fn check_qybe(u1: C64, u2: C64, u3: C64, eta: C64) -> Result<VerificationReport> {
    let residual = qybe_residual(|u| Ok(r_matrix(u, eta)?.matrix()), u1, u2, u3)?;
    Ok(VerificationReport::new("quantum Yang-Baxter equation", residual)
        .with("u1", u1)
        .with("u2", u2)
        .with("u3", u3)
        .with("eta", eta))
}

/// Residual of the reflection equation
/// `R₁₂(u₁−u₂) K₁(u₁) R₂₁(u₁+u₂) K₂(u₂) = K₂(u₂) R₁₂(u₁+u₂) K₁(u₁) R₂₁(u₁−u₂)`,
/// with independent K-matrices allowed on the two sides.
fn reflection_residual(
    u1: C64,
    u2: C64,
    eta: C64,
    left: (&KMatrix2, &KMatrix2),
    right: (&KMatrix2, &KMatrix2),
) -> Result<f64> {
    let rm = r_matrix(u1 - u2, eta)?.matrix();
    let rp = r_matrix(u1 + u2, eta)?.matrix();
    let r12m = embed_two(&rm, 0, 1, 2);
    let r21m = embed_two(&rm, 1, 0, 2);
    let r12p = embed_two(&rp, 0, 1, 2);
    let r21p = embed_two(&rp, 1, 0, 2);
    let k1l = embed_one(&left.0.matrix(), 0, 2);
    let k2l = embed_one(&left.1.matrix(), 1, 2);
    let k1r = embed_one(&right.0.matrix(), 0, 2);
    let k2r = embed_one(&right.1.matrix(), 1, 2);
    let lhs = &r12m * &k1l * &r21p * &k2l;
    let rhs = &k2r * &r12p * &k1r * &r21m;
    Ok(max_norm_diff(&lhs, &rhs))
}

/// Reflection-equation residual for a given K-matrix variant.
pub fn reflection_residual_variant(u1: C64, u2: C64, p: &ModelParams, variant: KMatrixVariant) -> Result<f64> {
    let k1 = k_matrix_variant(u1, p.lambda, p.zeta, variant)?;
    let k2 = k_matrix_variant(u2, p.lambda, p.zeta, variant)?;
    reflection_residual(u1, u2, p.eta, (&k1, &k2), (&k1, &k2))
}

pub fn check_reflection(u1: C64, u2: C64, p: &ModelParams) -> Result<VerificationReport> {
    let residual = reflection_residual_variant(u1, u2, p, KMatrixVariant::Corrected)?;
    Ok(VerificationReport::new("reflection equation", residual)
        .with("u1", u1)
        .with("u2", u2)
        .with("eta", p.eta)
        .with("zeta", p.zeta)
        .with("lambda_1", p.lambda.m1())
        .with("lambda_2", p.lambda.m2()))
}

/// Unitarity `R₁₂(u) R₂₁(−u) = id`, evaluated as `R(u)·P·R(−u)·P − id`.
pub fn check_unitarity_vertex(u: C64, eta: C64) -> Result<VerificationReport> {
    let p = permutation4();
    let lhs = r_matrix(u, eta)?.matrix() * &p * r_matrix(-u, eta)?.matrix() * &p;
    let residual = max_norm_diff(&lhs, &CMatrix::identity(4, 4));
    Ok(VerificationReport::new("vertex unitarity", residual)
        .with("u", u)
        .with("eta", eta))
}

/// The K-matrix after the diagonal similarity transformation, at a large
/// imaginary shift of λ₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalLimit {
    pub matrix: [[C64; 2]; 2],
    /// `max |off-diagonal| / max |diagonal|`.
    pub ratio: f64,
}

/// `D·K(u)·D⁻¹` with `D = diag(1, e^{−i(λ₁+λ₂)})`, evaluated at
/// `λ₁ → λ₁ + i·im_lambda1`.
///
/// In this direction the off-diagonal entries decay like `e^{−Im λ₁}`; the
/// opposite conjugation `D⁻¹·K·D` makes one of them grow instead.
pub fn diagonal_limit_k(u: C64, lambda: WeightVector, zeta: C64, im_lambda1: f64) -> Result<DiagonalLimit> {
    let shifted = WeightVector::new(lambda.m1() + c(0.0, im_lambda1), lambda.m2());
    let k = k_matrix(u, shifted, zeta)?;
    let i = c(0.0, 1.0);
    let d2 = (-i * (shifted.m1() + shifted.m2())).exp();
    let e = k.entries;
    let matrix = [[e[0][0], e[0][1] / d2], [e[1][0] * d2, e[1][1]]];
    let off = matrix[0][1].norm().max(matrix[1][0].norm());
    let diag = matrix[0][0].norm().max(matrix[1][1].norm());
    Ok(DiagonalLimit {
        matrix,
        ratio: off / diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::ParamSampler;

    #[test]
    fn r_matrix_examples() {
        let eta = c(0.7, 0.0);
        let r0 = r_matrix(c(0.0, 0.0), eta).unwrap().matrix();
        assert!(max_norm_diff(&r0, &permutation4()) < 1e-15);

        let r = r_matrix(c(0.3, 0.2), c(1e-12, 0.0)).unwrap().matrix();
        assert!(max_norm_diff(&r, &CMatrix::identity(4, 4)) < 1e-11);

        let u = c(0.3, 0.2);
        let a = r_matrix(u, eta).unwrap();
        let b = r_matrix(-u, eta).unwrap();
        assert!((a.b * b.b + a.c * b.c - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn r_matrix_guard() {
        let eta = c(0.7, 0.1);
        assert!(r_matrix(-eta, eta).is_err());
        assert!(check_unitarity_vertex(-eta + c(1e-12, 0.0), eta).is_err());
    }

    #[test]
    fn k_matrix_at_zero_is_scalar() {
        let lam = WeightVector::new(c(0.4, 0.2), c(-0.2, 0.3));
        let k = k_matrix(c(0.0, 0.0), lam, c(0.3, 0.1)).unwrap();
        assert_eq!(k.entries[0][1], c(0.0, 0.0));
        assert_eq!(k.entries[1][0], c(0.0, 0.0));
        assert!((k.entries[0][0] - k.entries[1][1]).norm() < 1e-15);
    }

    #[test]
    fn qybe_corrupted_c_fails() {
        let mut s = ParamSampler::new(11);
        let (u1, u2, u3, eta) = (s.complex(), s.complex(), s.complex(), s.complex());
        assert!(check_qybe(u1, u2, u3, eta).unwrap().passes(1e-12));
        assert!(check_qybe(u1, u1, u3, eta).unwrap().passes(1e-12));
        let corrupted = |u: C64| -> Result<CMatrix> {
            let mut r = r_matrix(u, eta)?;
            r.c *= 1.0 + 1e-6;
            Ok(r.matrix())
        };
        assert!(qybe_residual(corrupted, u1, u2, u3).unwrap() > 1e-8);
    }

    #[test]
    fn reflection_one_sided_lambda_shift_fails() {
        let mut s = ParamSampler::new(12);
        let p = s.params(0);
        let (u1, u2) = (s.complex(), s.complex());
        assert!(check_reflection(u1, u2, &p).unwrap().passes(1e-10));
        assert!(check_reflection(u1, u1, &p).unwrap().passes(1e-12));
        let k1 = k_matrix(u1, p.lambda, p.zeta).unwrap();
        let k2 = k_matrix(u2, p.lambda, p.zeta).unwrap();
        let shifted = WeightVector::new(p.lambda.m1() + 0.01, p.lambda.m2());
        let j1 = k_matrix(u1, shifted, p.zeta).unwrap();
        let j2 = k_matrix(u2, shifted, p.zeta).unwrap();
        let r = reflection_residual(u1, u2, p.eta, (&k1, &k2), (&j1, &j2)).unwrap();
        assert!(r > 1e-6, "residual {r}");
    }

    #[test]
    fn printed_k_also_solves_reflection_equation() {
        let mut s = ParamSampler::new(13);
        let p = s.params(0);
        let (u1, u2) = (s.complex(), s.complex());
        let r = reflection_residual_variant(u1, u2, &p, KMatrixVariant::Printed).unwrap();
        assert!(r < 1e-10);
    }

    #[test]
    fn diagonal_limit_examples() {
        let lam = WeightVector::new(c(0.4, 0.2), c(-0.2, 0.3));
        let z = c(0.3, 0.1);
        assert_eq!(diagonal_limit_k(c(0.0, 0.0), lam, z, 0.0).unwrap().ratio, 0.0);
        let u = c(0.5, 0.2);
        let r10 = diagonal_limit_k(u, lam, z, 10.0).unwrap().ratio;
        let r20 = diagonal_limit_k(u, lam, z, 20.0).unwrap().ratio;
        assert!(r20 < 1e-6);
        assert!(r20 / r10 < 1e-3);
    }
}
