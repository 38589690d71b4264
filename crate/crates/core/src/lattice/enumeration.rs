use crate::error::{Error, Result};
use crate::linalg::{c, to_array4};
use crate::trig::{ModelParams, C64, GENERICITY_DELTA};
use crate::vertex::r_matrix;

use super::contraction::LatticeSpec;

/// Largest N accepted by [`partition_enumeration`].
pub const MAX_ENUMERATION_N: usize = 3;

/// One local weight in the order the configuration is built.
#[allow(clippy::large_enum_variant)]
enum Vertex {
    /// Choose the entering spin of the auxiliary line.
    AuxIn(usize),
    /// Bulk vertex on (first, second) edges; `first_is_aux` selects which of
    /// the two is the horizontal line.
    Bulk {
        site: usize,
        weights: [[C64; 4]; 4],
        first_is_aux: bool,
    },
    /// Reflection-end vertex of line `i`.
    Reflect(usize),
    /// Read off the leaving spin of the auxiliary line.
    AuxOut(usize),
}

struct Walker<'a> {
    spec: &'a LatticeSpec,
    vertices: Vec<Vertex>,
}

impl Walker<'_> {
    /// Sums the weights of all edge configurations reachable from the
    /// current partial configuration.
    fn walk(&self, idx: usize, quantum: &mut [usize], aux: usize, weight: C64) -> C64 {
        let zero = c(0.0, 0.0);
        if idx == self.vertices.len() {
            let bra = &self.spec.quantum_bra;
            return quantum.iter().enumerate().fold(weight, |w, (j, &s)| w * bra[j][s]);
        }
        match &self.vertices[idx] {
            Vertex::AuxIn(i) => {
                let ket = self.spec.aux_ket[*i];
                (0..2)
                    .filter(|&a| ket[a] != zero)
                    .map(|a| self.walk(idx + 1, quantum, a, weight * ket[a]))
                    .sum()
            }
            Vertex::AuxOut(i) => {
                let w = self.spec.aux_bra[*i][aux];
                if w == zero {
                    zero
                } else {
                    self.walk(idx + 1, quantum, 0, weight * w)
                }
            }
            Vertex::Reflect(i) => {
                let k = &self.spec.k[*i];
                (0..2)
                    .filter(|&out| k[out][aux] != zero)
                    .map(|out| self.walk(idx + 1, quantum, out, weight * k[out][aux]))
                    .sum()
            }
            Vertex::Bulk {
                site,
                weights,
                first_is_aux,
            } => {
                let q = quantum[*site];
                let (x, y) = if *first_is_aux { (aux, q) } else { (q, aux) };
                let col = 2 * x + y;
                let mut total = zero;
                for (row, r) in weights.iter().enumerate() {
                    let w = r[col];
                    if w == zero {
                        continue;
                    }
                    let (x2, y2) = (row >> 1, row & 1);
                    let (new_aux, new_q) = if *first_is_aux { (x2, y2) } else { (y2, x2) };
                    quantum[*site] = new_q;
                    total += self.walk(idx + 1, quantum, new_aux, weight * w);
                    quantum[*site] = q;
                }
                total
            }
        }
    }
}

/// Sum over all edge configurations of the lattice of the product of local
/// vertex weights, with the boundary edges weighted by the components of
/// the boundary states.
pub fn enumerate_lattice(spec: &LatticeSpec) -> Result<C64> {
    spec.validate()?;
    let n = spec.n();
    let mut vertices = Vec::new();
    for i in (0..n).rev() {
        vertices.push(Vertex::AuxIn(i));
        for j in (0..n).rev() {
            vertices.push(Vertex::Bulk {
                site: j,
                weights: to_array4(&r_matrix(spec.u[i] + spec.xi[j], spec.eta)?.matrix()),
                first_is_aux: false,
            });
        }
        vertices.push(Vertex::Reflect(i));
        for j in 0..n {
            vertices.push(Vertex::Bulk {
                site: j,
                weights: to_array4(&r_matrix(spec.u[i] - spec.xi[j], spec.eta)?.matrix()),
                first_is_aux: true,
            });
        }
        vertices.push(Vertex::AuxOut(i));
    }
    let walker = Walker { spec, vertices };
    let zero = c(0.0, 0.0);
    let mut total = zero;
    for s in 0..(1usize << n) {
        let mut quantum: Vec<usize> = (0..n).map(|j| (s >> (n - 1 - j)) & 1).collect();
        let w = quantum
            .iter()
            .enumerate()
            .fold(c(1.0, 0.0), |w, (j, &b)| w * spec.quantum_ket[j][b]);
        if w != zero {
            total += walker.walk(0, &mut quantum, 0, w);
        }
    }
    Ok(total)
}

/// Partition function by explicit enumeration of lattice configurations.
pub fn partition_enumeration(p: &ModelParams) -> Result<C64> {
    if p.n > MAX_ENUMERATION_N {
        return Err(Error::size_limit("enumeration", p.n, MAX_ENUMERATION_N));
    }
    p.ensure_generic(GENERICITY_DELTA)?;
    enumerate_lattice(&LatticeSpec::from_params(p)?)
}
