//! Domain-wall partition function of the six-vertex model with a
//! non-diagonal reflecting end, computed by several independent methods,
//! together with numerical checks of the integrability identities behind it.
//!
//! Conventions used throughout:
//! * spin/basis index 0 is the up state ε₁ and index 1 the down state ε₂;
//! * a two-site basis vector `|i₁ i₂⟩` has flat index `2·i₁ + i₂`, and in an
//!   N-site space site 0 is the most significant binary digit;
//! * residuals are entrywise max-norms.

// Index loops mirror the tensor notation; `!(x <= tol)` comparisons are
// deliberate so that NaN residuals fail.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod determinant;
pub mod error;
mod extended;
pub mod face;
pub mod fbasis;
pub mod lattice;
pub mod linalg;
pub mod report;
pub mod trig;
pub mod verify;
pub mod vertex;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, ExtComplex};
pub use report::VerificationReport;
pub use trig::{ModelParams, ParamSampler, WeightVector, C64};
