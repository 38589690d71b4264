use crate::error::{Error, Result};
use crate::linalg::{c, product_state, to_array2};
use crate::trig::{ModelParams, WeightVector, C64, GENERICITY_DELTA};
use crate::vertex::{diagonal_limit_k, k_matrix};

use super::boundary::boundary_states;
use super::monodromy::apply_double_row;

/// Largest N accepted by [`partition_contraction`].
pub const MAX_CONTRACTION_N: usize = 10;

/// Everything needed to evaluate
/// `Z = ⟨bra_q| Π_i (aux_bra_i 𝕋_ī(u_i) aux_ket_i) |ket_q⟩` (line 0 leftmost).
///
/// Shared by the contraction and the enumeration so both see identical
/// inputs. Boundary states are stored as single-site factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub eta: C64,
    pub u: Vec<C64>,
    pub xi: Vec<C64>,
    /// K-matrix used on each line.
    pub k: Vec<[[C64; 2]; 2]>,
    pub quantum_ket: Vec<[C64; 2]>,
    pub quantum_bra: Vec<[C64; 2]>,
    pub aux_ket: Vec<[C64; 2]>,
    pub aux_bra: Vec<[C64; 2]>,
}

impl LatticeSpec {
    /// The domain-wall lattice with intertwiner boundary states.
    pub fn from_params(p: &ModelParams) -> Result<Self> {
        let b = boundary_states(p)?;
        let k =
            p.u.iter()
                .map(|&u| Ok(to_array2(&k_matrix(u, p.lambda, p.zeta)?.matrix())))
                .collect::<Result<Vec<_>>>()?;
        Ok(LatticeSpec {
            eta: p.eta,
            u: p.u.clone(),
            xi: p.xi.clone(),
            k,
            quantum_ket: b.omega2,
            quantum_bra: b.omega1_dual,
            aux_ket: b.omega_bar1,
            aux_bra: b.omega_bar2_dual,
        })
    }

    /// The same lattice after the diagonal similarity transformation
    /// `D = diag(1, e^{−i(λ₁+λ₂)})` at `λ₁ → λ₁ + i·im_lambda1`: kets are
    /// multiplied by `D`, bras by `D⁻¹` and K is replaced by `D K D⁻¹`, so the
    /// partition function is unchanged.
    pub fn diagonal_limit(p: &ModelParams, im_lambda1: f64) -> Result<Self> {
        let lam = WeightVector::new(p.lambda.m1() + c(0.0, im_lambda1), p.lambda.m2());
        let shifted = ModelParams {
            lambda: lam,
            ..p.clone()
        };
        let mut spec = LatticeSpec::from_params(&shifted)?;
        let d = (-c(0.0, 1.0) * (lam.m1() + lam.m2())).exp();
        for (k, &u) in spec.k.iter_mut().zip(p.u.iter()) {
            *k = diagonal_limit_k(u, p.lambda, p.zeta, im_lambda1)?.matrix;
        }
        for f in spec.quantum_ket.iter_mut().chain(spec.aux_ket.iter_mut()) {
            f[1] *= d;
        }
        for f in spec.quantum_bra.iter_mut().chain(spec.aux_bra.iter_mut()) {
            f[1] /= d;
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.n();
        let lens = [
            ("xi", self.xi.len()),
            ("k", self.k.len()),
            ("quantum_ket", self.quantum_ket.len()),
            ("quantum_bra", self.quantum_bra.len()),
            ("aux_ket", self.aux_ket.len()),
            ("aux_bra", self.aux_bra.len()),
        ];
        for (field, len) in lens {
            if len != n {
                return Err(Error::LengthMismatch { field, n, len });
            }
        }
        Ok(())
    }
}

/// Sweeps the quantum boundary vector through the lines one at a time,
/// starting from the rightmost (line N−1).
pub fn contract_lattice(spec: &LatticeSpec) -> Result<C64> {
    spec.validate()?;
    let n = spec.n();
    let quantum: Vec<usize> = (0..n).collect();
    let mut v: Vec<C64> = product_state(&spec.quantum_ket).iter().copied().collect();
    for i in (0..n).rev() {
        let ket = spec.aux_ket[i];
        let bra = spec.aux_bra[i];
        // Auxiliary space is the least significant site n.
        let mut full = vec![c(0.0, 0.0); 2 * v.len()];
        for (s, &x) in v.iter().enumerate() {
            full[2 * s] = x * ket[0];
            full[2 * s + 1] = x * ket[1];
        }
        let out = apply_double_row(&full, n + 1, n, &quantum, spec.u[i], &spec.xi, spec.eta, &spec.k[i])?;
        for (s, x) in v.iter_mut().enumerate() {
            *x = bra[0] * out[2 * s] + bra[1] * out[2 * s + 1];
        }
    }
    let bra = product_state(&spec.quantum_bra);
    Ok(bra.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
}

/// Partition function by contraction of the double-row monodromies with the
/// intertwiner boundary states.
pub fn partition_contraction(p: &ModelParams) -> Result<C64> {
    if p.n > MAX_CONTRACTION_N {
        return Err(Error::size_limit("contraction", p.n, MAX_CONTRACTION_N));
    }
    p.ensure_generic(GENERICITY_DELTA)?;
    contract_lattice(&LatticeSpec::from_params(p)?)
}
