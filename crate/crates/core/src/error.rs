use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A denominator (or pole distance) fell below the genericity threshold.
    #[error("singular parameters: |{what}| = {modulus:.3e} is below the genericity threshold")]
    Singular { what: String, modulus: f64 },

    #[error("degenerate intertwiners at {what}: |det| = {modulus:.3e}")]
    DegenerateIntertwiner { what: String, modulus: f64 },

    #[error("{method} supports N <= {max}, got N = {n}")]
    SizeLimit { method: &'static str, n: usize, max: usize },

    #[error("length mismatch: n = {n} but {field} has {len} entries")]
    LengthMismatch { field: &'static str, n: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not invertible: {0}")]
    NotInvertible(String),
}

impl Error {
    pub(crate) fn singular(what: impl Into<String>, modulus: f64) -> Self {
        Error::Singular {
            what: what.into(),
            modulus,
        }
    }

    pub(crate) fn size_limit(method: &'static str, n: usize, max: usize) -> Self {
        Error::SizeLimit { method, n, max }
    }
}
