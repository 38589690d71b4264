use crate::error::{Error, Result};
use crate::face::{face_k_matrix, sos_r_matrix};
use crate::linalg::{c, spins_of, to_array4, CMatrix};
use crate::trig::{sin_nz, ModelParams, WeightVector, C64, DOWN, GENERICITY_DELTA, UP};

use super::operator::MultiSiteOperator;

/// Largest N accepted by [`partition_face_form`].
pub const MAX_FACE_FORM_N: usize = 8;

/// Face-type one-row monodromy `T_F(l|u)`; `entries[a][b]` maps auxiliary
/// input `b` to auxiliary output `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMonodromy {
    pub entries: [[MultiSiteOperator; 2]; 2],
}

impl FaceMonodromy {
    pub fn entry(&self, a: usize, b: usize) -> &CMatrix {
        self.entries[a][b].matrix()
    }
}

/// Builds `T_F(l|u)` column by column: the auxiliary line crosses sites
/// 0..N in order, and the R-matrix at site k uses the weight `l` shifted by
/// the spins already emitted on sites 0..k.
pub(crate) fn face_monodromy_matrices(l: WeightVector, u: C64, xi: &[C64], eta: C64) -> Result<[[CMatrix; 2]; 2]> {
    let n = xi.len();
    let dim = 1usize << n;
    // r[k][ups] = R(u − ξ_k; l − η·(ups·ĥ₁ + (k−ups)·ĥ₂)).
    let mut r: Vec<Vec<[[C64; 4]; 4]>> = Vec::with_capacity(n);
    for (k, &x) in xi.iter().enumerate() {
        let mut row = Vec::with_capacity(k + 1);
        for ups in 0..=k {
            let w = l.shift(UP, 2 * ups as i64 - k as i64, eta);
            row.push(to_array4(&sos_r_matrix(u - x, w, eta)?.matrix));
        }
        r.push(row);
    }
    let zero = c(0.0, 0.0);
    let mut t: [[CMatrix; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| CMatrix::zeros(dim, dim)));
    for s in 0..dim {
        let input = spins_of(s, n);
        for j in 0..2 {
            // amp[aux * 2^k + prefix]
            let mut amp = vec![zero; 2];
            amp[j] = c(1.0, 0.0);
            for k in 0..n {
                let width = 1usize << k;
                let mut next = vec![zero; 4 * width];
                for a in 0..2 {
                    for prefix in 0..width {
                        let x = amp[a * width + prefix];
                        if x == zero {
                            continue;
                        }
                        let ups = k - prefix.count_ones() as usize;
                        let rm = &r[k][ups];
                        let col = 2 * a + input[k];
                        for a2 in 0..2 {
                            for o in 0..2 {
                                let w = rm[2 * a2 + o][col];
                                if w != zero {
                                    next[a2 * 2 * width + 2 * prefix + o] += x * w;
                                }
                            }
                        }
                    }
                }
                amp = next;
            }
            for a in 0..2 {
                for out in 0..dim {
                    let x = amp[a * dim + out];
                    if x != zero {
                        t[a][j][(out, s)] += x;
                    }
                }
            }
        }
    }
    Ok(t)
}

pub fn one_row_face_monodromy(l: WeightVector, u: C64, p: &ModelParams) -> Result<FaceMonodromy> {
    let t = face_monodromy_matrices(l, u, &p.xi, p.eta)?;
    let [[t11, t12], [t21, t22]] = t;
    let op = MultiSiteOperator::on_quantum_sites;
    Ok(FaceMonodromy {
        entries: [[op(t11), op(t12)], [op(t21), op(t22)]],
    })
}

/// The weight-independent part of the creation operator,
/// `Π_k sin(u+ξ_k)/sin(u+ξ_k+η) · [k₁ T(λ|u)²₁ T(λ+ηĥ₂|−u−η)²₂ − k₂ T(λ|u)²₂ T(λ+ηĥ₁|−u−η)²₁]`.
fn creation_core(lambda: WeightVector, u: C64, p: &ModelParams) -> Result<CMatrix> {
    let eta = p.eta;
    let kd = face_k_matrix(lambda, u, p.zeta)?;
    let t = face_monodromy_matrices(lambda, u, &p.xi, eta)?;
    let t_up = face_monodromy_matrices(lambda.shift(UP, -1, eta), -u - eta, &p.xi, eta)?;
    let t_down = face_monodromy_matrices(lambda.shift(DOWN, -1, eta), -u - eta, &p.xi, eta)?;
    let mut pk = c(1.0, 0.0);
    for (k, &x) in p.xi.iter().enumerate() {
        pk *= (u + x).sin() / sin_nz(u + x + eta, || format!("sin(u + xi_{} + eta)", k + 1))?;
    }
    let m = &t[DOWN][UP] * &t_down[DOWN][DOWN] * kd[UP] - &t[DOWN][DOWN] * &t_up[DOWN][UP] * kd[DOWN];
    Ok(m * pk)
}

/// Creation operator `𝒯⁻_F(m,λ|u)²₁` at a fixed weight `m`.
pub fn face_creation_operator_at(
    m: WeightVector,
    lambda: WeightVector,
    u: C64,
    p: &ModelParams,
) -> Result<MultiSiteOperator> {
    let s21 = sin_nz(lambda.m21(), || "sin(lambda_21)".to_string())?;
    let core = creation_core(lambda, u, p)?;
    Ok(MultiSiteOperator::on_quantum_sites(core * (m.m21().sin() / s21)))
}

/// Creation operator with the weight read off each input basis vector,
/// `m = λ − η Σ_k ĥ_{i_k}`.
pub fn face_creation_operator(lambda: WeightVector, u: C64, p: &ModelParams) -> Result<MultiSiteOperator> {
    let s21 = sin_nz(lambda.m21(), || "sin(lambda_21)".to_string())?;
    let mut core = creation_core(lambda, u, p)?;
    for s in 0..core.ncols() {
        let m = lambda.shift_by_spins(&spins_of(s, p.n), p.eta);
        let f = m.m21().sin() / s21;
        for z in core.column_mut(s).iter_mut() {
            *z *= f;
        }
    }
    Ok(MultiSiteOperator::on_quantum_sites(core))
}

/// `⟨1,…,1| Π_{k=1..N} 𝒯⁻_F(λ+(2k−N)ηĥ₁, λ|u_k)²₁ |2,…,2⟩`.
pub fn partition_face_form(p: &ModelParams) -> Result<C64> {
    if p.n > MAX_FACE_FORM_N {
        return Err(Error::size_limit("face form", p.n, MAX_FACE_FORM_N));
    }
    p.ensure_generic(GENERICITY_DELTA)?;
    let n = p.n;
    let dim = 1usize << n;
    let mut v = crate::linalg::CVector::zeros(dim);
    v[dim - 1] = c(1.0, 0.0);
    for k in (1..=n).rev() {
        let m = p.lambda.shift(UP, -(2 * k as i64 - n as i64), p.eta);
        let op = face_creation_operator_at(m, p.lambda, p.u[k - 1], p)?;
        v = op.apply(&v);
    }
    Ok(v[0])
}
