use crate::error::{Error, Result};
use crate::linalg::{apply_one_site, apply_two_site, c, embed_two, max_norm_diff, to_array2, CMatrix};
use crate::report::VerificationReport;
use crate::trig::{ModelParams, C64};
use crate::vertex::{k_matrix, r_matrix};

use super::operator::{MultiSiteOperator, SiteLabel};

/// Largest N accepted by [`check_exchange_relation`].
pub const MAX_EXCHANGE_N: usize = 6;

/// Applies the double-row monodromy
/// `𝕋(u) = R̄_{a,N}(u−ξ_N)…R̄_{a,1}(u−ξ_1) K R̄_{1,a}(u+ξ_1)…R̄_{N,a}(u+ξ_N)`
/// to a state on `n_total` sites, with the auxiliary space at site `aux` and
/// quantum site `j` (inhomogeneity `xi[j]`) at site `quantum[j]`.
#[allow(clippy::too_many_arguments)]
pub fn apply_double_row(
    state: &[C64],
    n_total: usize,
    aux: usize,
    quantum: &[usize],
    u: C64,
    xi: &[C64],
    eta: C64,
    k: &[[C64; 2]; 2],
) -> Result<Vec<C64>> {
    assert_eq!(quantum.len(), xi.len());
    let mut v = state.to_vec();
    for j in (0..xi.len()).rev() {
        let r = crate::linalg::to_array4(&r_matrix(u + xi[j], eta)?.matrix());
        v = apply_two_site(&r, quantum[j], aux, n_total, &v);
    }
    v = apply_one_site(k, aux, n_total, &v);
    for j in 0..xi.len() {
        let r = crate::linalg::to_array4(&r_matrix(u - xi[j], eta)?.matrix());
        v = apply_two_site(&r, aux, quantum[j], n_total, &v);
    }
    Ok(v)
}

/// Dense matrix of the double-row monodromy on `n_total` sites.
fn dense_double_row(
    n_total: usize,
    aux: usize,
    quantum: &[usize],
    u: C64,
    xi: &[C64],
    eta: C64,
    k: &[[C64; 2]; 2],
) -> Result<CMatrix> {
    let dim = 1usize << n_total;
    let mut m = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        let mut e = vec![c(0.0, 0.0); dim];
        e[s] = c(1.0, 0.0);
        let col = apply_double_row(&e, n_total, aux, quantum, u, xi, eta, k)?;
        for (t, x) in col.into_iter().enumerate() {
            m[(t, s)] = x;
        }
    }
    Ok(m)
}

/// `𝕋(u)` as a 2×2 matrix in the auxiliary space whose entries act on the
/// quantum sites; `entries[a][b]` maps auxiliary input `b` to output `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleRowMonodromy {
    pub entries: [[MultiSiteOperator; 2]; 2],
}

impl DoubleRowMonodromy {
    pub fn entry(&self, a: usize, b: usize) -> &CMatrix {
        self.entries[a][b].matrix()
    }
}

/// Double-row monodromy at spectral parameter `u` for an arbitrary list of
/// inhomogeneities (possibly empty) and K-matrix.
pub fn double_row_monodromy_at(u: C64, xi: &[C64], eta: C64, k: &[[C64; 2]; 2]) -> Result<DoubleRowMonodromy> {
    let n = xi.len();
    let quantum: Vec<usize> = (1..=n).collect();
    let full = dense_double_row(n + 1, 0, &quantum, u, xi, eta, k)?;
    let q = 1usize << n;
    let block = |a: usize, b: usize| {
        MultiSiteOperator::new(
            (0..n).map(SiteLabel::Quantum).collect(),
            full.view((a * q, b * q), (q, q)).into_owned(),
        )
        .expect("block dimension matches")
    };
    Ok(DoubleRowMonodromy {
        entries: [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]],
    })
}

/// `𝕋_ī(u_i)` for line `i` (0-based).
pub fn double_row_monodromy(i: usize, p: &ModelParams) -> Result<DoubleRowMonodromy> {
    if i >= p.n {
        return Err(Error::InvalidArgument(format!("line index {i} >= N = {}", p.n)));
    }
    let k = to_array2(&k_matrix(p.u[i], p.lambda, p.zeta)?.matrix());
    double_row_monodromy_at(p.u[i], &p.xi, p.eta, &k)
}

/// Exchange relation of two double-row monodromies on lines `i ≠ j`:
/// `R̄_{īj̄}(u_i−u_j) 𝕋_ī(u_i) R̄_{j̄ī}(u_i+u_j) 𝕋_j̄(u_j)
///  = 𝕋_j̄(u_j) R̄_{īj̄}(u_i+u_j) 𝕋_ī(u_i) R̄_{j̄ī}(u_i−u_j)`,
/// evaluated on auxiliary ⊗ auxiliary ⊗ quantum space.
pub fn check_exchange_relation(i: usize, j: usize, p: &ModelParams) -> Result<VerificationReport> {
    if p.n > MAX_EXCHANGE_N {
        return Err(Error::size_limit("exchange relation", p.n, MAX_EXCHANGE_N));
    }
    if i >= p.n || j >= p.n || i == j {
        return Err(Error::InvalidArgument(format!(
            "exchange relation needs two distinct lines below N = {}, got {i} and {j}",
            p.n
        )));
    }
    let n_total = p.n + 2;
    let quantum: Vec<usize> = (2..n_total).collect();
    let (ui, uj, eta) = (p.u[i], p.u[j], p.eta);
    let ki = to_array2(&k_matrix(ui, p.lambda, p.zeta)?.matrix());
    let kj = to_array2(&k_matrix(uj, p.lambda, p.zeta)?.matrix());
    let ti = dense_double_row(n_total, 0, &quantum, ui, &p.xi, eta, &ki)?;
    let tj = dense_double_row(n_total, 1, &quantum, uj, &p.xi, eta, &kj)?;
    let rm = r_matrix(ui - uj, eta)?.matrix();
    let rp = r_matrix(ui + uj, eta)?.matrix();
    let r_ij_m = embed_two(&rm, 0, 1, n_total);
    let r_ji_m = embed_two(&rm, 1, 0, n_total);
    let r_ij_p = embed_two(&rp, 0, 1, n_total);
    let r_ji_p = embed_two(&rp, 1, 0, n_total);
    let lhs = &r_ij_m * &ti * &r_ji_p * &tj;
    let rhs = &tj * &r_ij_p * &ti * &r_ji_m;
    Ok(
        VerificationReport::new("double-row exchange relation", max_norm_diff(&lhs, &rhs))
            .with("u_i", ui)
            .with("u_j", uj)
            .with("eta", eta),
    )
}
