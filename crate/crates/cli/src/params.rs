use std::fs;
use std::path::Path;

use rdw_core::trig::{genericity_guard, ParamsRecord, GENERICITY_DELTA};
use rdw_core::ModelParams;

use crate::error::{CliError, CliResult};

/// Reads a parameter file, checks lengths and runs the genericity guard.
/// A guard failure lists every offending denominator.
pub fn load_params(path: &Path) -> CliResult<ModelParams> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let record: ParamsRecord = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let p = ModelParams::try_from(record)?;
    validate(p, path)
}

/// Runs the genericity guard on parameters that are already parsed.
pub fn validate(p: ModelParams, path: &Path) -> CliResult<ModelParams> {
    let report = genericity_guard(&p, GENERICITY_DELTA);
    if report.passed() {
        Ok(p)
    } else {
        Err(CliError::Guard {
            path: path.to_path_buf(),
            delta: report.delta,
            violations: report.violations,
        })
    }
}
