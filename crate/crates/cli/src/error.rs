use std::path::PathBuf;

use rdw_core::trig::GuardViolation;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SIZE_LIMIT: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: parameters fail the genericity guard (delta = {delta:e}):\n{}", format_violations(.violations))]
    Guard {
        path: PathBuf,
        delta: f64,
        violations: Vec<GuardViolation>,
    },

    #[error(transparent)]
    Model(#[from] rdw_core::Error),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("writing output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(rdw_core::Error::SizeLimit { .. }) => EXIT_SIZE_LIMIT,
            _ => EXIT_INPUT,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

fn format_violations(v: &[GuardViolation]) -> String {
    v.iter()
        .map(|x| format!("  |{}| = {:.3e}", x.condition, x.modulus))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type CliResult<T> = std::result::Result<T, CliError>;
