use serde::{Deserialize, Serialize};

use crate::trig::{ComplexRecord, C64};

/// A named complex parameter recorded alongside a residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: ComplexRecord,
}

/// Result of checking one identity at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub parameters: Vec<NamedValue>,
    /// Entrywise max-norm of LHS − RHS (or a relative difference where the
    /// identity says so).
    pub residual: f64,
}

impl VerificationReport {
    pub fn new(identity: impl Into<String>, residual: f64) -> Self {
        VerificationReport {
            identity: identity.into(),
            parameters: Vec::new(),
            residual,
        }
    }

    pub fn with(mut self, name: &str, value: C64) -> Self {
        self.parameters.push(NamedValue {
            name: name.to_string(),
            value: value.into(),
        });
        self
    }

    /// `true` iff the residual is finite and strictly below `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.residual.is_finite() && self.residual < tol
    }
}
