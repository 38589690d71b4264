use crate::error::Result;
use crate::face::{intertwiner, phi_tilde};
use crate::linalg::{product_state, CVector};
use crate::trig::{ModelParams, C64, DOWN, UP};

/// The four boundary states, stored as their single-site factors.
///
/// Factor `k` (0-based) of each state:
/// * `omega2`: `φ_{λ−kηĥ₂, λ−(k+1)ηĥ₂}(ξ_k)`;
/// * `omega1_dual`: `φ̃_{λ−kηĥ₁, λ−(k+1)ηĥ₁}(ξ_k)`;
/// * `omega_bar1` (barred space k): `φ_{λ−(N−2k−2)ηĥ₁, λ−(N−2k−1)ηĥ₁}(−u_k)`;
/// * `omega_bar2_dual` (barred space k): `φ̃_{λ−(N−2k−1)ηĥ₁+ηĥ₂, λ−(N−2k−1)ηĥ₁}(u_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryStateSet {
    pub omega2: Vec<[C64; 2]>,
    pub omega1_dual: Vec<[C64; 2]>,
    pub omega_bar1: Vec<[C64; 2]>,
    pub omega_bar2_dual: Vec<[C64; 2]>,
}

impl BoundaryStateSet {
    pub fn omega2_vector(&self) -> CVector {
        product_state(&self.omega2)
    }

    pub fn omega1_dual_vector(&self) -> CVector {
        product_state(&self.omega1_dual)
    }

    pub fn omega_bar1_vector(&self) -> CVector {
        product_state(&self.omega_bar1)
    }

    pub fn omega_bar2_dual_vector(&self) -> CVector {
        product_state(&self.omega_bar2_dual)
    }
}

pub fn boundary_states(p: &ModelParams) -> Result<BoundaryStateSet> {
    let (n, eta, lam) = (p.n as i64, p.eta, p.lambda);
    let mut out = BoundaryStateSet {
        omega2: Vec::with_capacity(p.n),
        omega1_dual: Vec::with_capacity(p.n),
        omega_bar1: Vec::with_capacity(p.n),
        omega_bar2_dual: Vec::with_capacity(p.n),
    };
    for k in 0..p.n {
        let k1 = k as i64 + 1;
        out.omega2
            .push(intertwiner(lam.shift(DOWN, k as i64, eta), DOWN, p.xi[k]).components);
        out.omega1_dual
            .push(phi_tilde(lam.shift(UP, k1, eta), UP, p.xi[k], eta)?);
        out.omega_bar1
            .push(intertwiner(lam.shift(UP, n - 2 * k1, eta), UP, -p.u[k]).components);
        // λ − (N−2k+2)ηĥ₁ − ηĥ₂ = λ − (N−2k+1)ηĥ₁ (1-based k).
        out.omega_bar2_dual
            .push(phi_tilde(lam.shift(UP, n - 2 * k1 + 1, eta), DOWN, p.u[k], eta)?);
    }
    Ok(out)
}
