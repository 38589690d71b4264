use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteLabel {
    /// Quantum (vertical-line) site `j`, 0-based.
    Quantum(usize),
    /// Auxiliary (barred, horizontal-line) space of line `i`, 0-based.
    Auxiliary(usize),
}

impl fmt::Display for SiteLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteLabel::Quantum(j) => write!(f, "{}", j + 1),
            SiteLabel::Auxiliary(i) => write!(f, "bar{}", i + 1),
        }
    }
}

/// Dense operator on a tensor product of two-dimensional sites; the first
/// label is the most significant digit of the flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSiteOperator {
    labels: Vec<SiteLabel>,
    matrix: CMatrix,
}

impl MultiSiteOperator {
    pub fn new(labels: Vec<SiteLabel>, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << labels.len();
        if matrix.shape() != (dim, dim) {
            return Err(Error::InvalidArgument(format!(
                "{} site labels need a {dim}x{dim} matrix, got {:?}",
                labels.len(),
                matrix.shape()
            )));
        }
        Ok(MultiSiteOperator { labels, matrix })
    }

    /// Operator on quantum sites `0..n`.
    pub fn on_quantum_sites(matrix: CMatrix) -> Self {
        let n = matrix.nrows().trailing_zeros() as usize;
        MultiSiteOperator::new((0..n).map(SiteLabel::Quantum).collect(), matrix)
            .expect("square matrix of power-of-two size")
    }

    pub fn labels(&self) -> &[SiteLabel] {
        &self.labels
    }

    pub fn n_sites(&self) -> usize {
        self.labels.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        assert_eq!(v.len(), self.matrix.ncols(), "state dimension mismatch");
        &self.matrix * v
    }
}
