//! Report serialization: pretty JSON, or CSV with complex values split into
//! `_re`/`_im` columns.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use rdw_core::linalg::ExtRecord;
use serde::Serialize;

use crate::commands::{Report, Results};
use crate::config::Format;
use crate::error::{CliError, CliResult};

pub fn write_report(report: &Report, format: Format, out: Option<&Path>) -> CliResult<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, report)?;
            writeln!(sink).map_err(|e| CliError::Output(e.to_string()))?;
        }
        Format::Csv => write_csv(report, &mut sink)?,
    }
    sink.flush().map_err(|e| CliError::Output(e.to_string()))
}

#[derive(Serialize)]
struct ComputeRow {
    method: String,
    n: usize,
    z_re: f64,
    z_im: f64,
    z_log10_abs: f64,
    normalized_re: Option<f64>,
    normalized_im: Option<f64>,
    prefactor_re: Option<f64>,
    prefactor_im: Option<f64>,
    prefactor_form: Option<String>,
    pivot_growth: Option<f64>,
    ill_conditioned: Option<bool>,
    elapsed_seconds: Option<f64>,
}

#[derive(Serialize)]
struct VerifyRow<'a> {
    suite: &'a str,
    identity: &'a str,
    trials: usize,
    max_residual: f64,
    worst_trial: usize,
    passed: bool,
}

#[derive(Serialize)]
struct CrosscheckRow {
    trial: usize,
    method: String,
    value_re: f64,
    value_im: f64,
    value_log10_abs: f64,
    elapsed_seconds: Option<f64>,
}

#[derive(Serialize)]
struct SweepRow {
    index: usize,
    parameter: String,
    parameter_re: f64,
    parameter_im: f64,
    method: String,
    z_re: Option<f64>,
    z_im: Option<f64>,
    z_log10_abs: Option<f64>,
    error: Option<String>,
}

fn split(z: &Option<ExtRecord>) -> (Option<f64>, Option<f64>) {
    (z.as_ref().map(|z| z.re), z.as_ref().map(|z| z.im))
}

fn write_csv(report: &Report, sink: &mut dyn Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(sink);
    match &report.results {
        Results::Compute(r) => {
            let (normalized_re, normalized_im) = split(&r.normalized);
            let (prefactor_re, prefactor_im) = split(&r.prefactor);
            w.serialize(ComputeRow {
                method: r.method.to_string(),
                n: r.n,
                z_re: r.z.re,
                z_im: r.z.im,
                z_log10_abs: r.z.log10_abs,
                normalized_re,
                normalized_im,
                prefactor_re,
                prefactor_im,
                prefactor_form: r.prefactor_form.map(|f| format!("{f:?}").to_ascii_lowercase()),
                pivot_growth: r.diagnostics.map(|d| d.pivot_growth),
                ill_conditioned: r.diagnostics.map(|d| d.ill_conditioned),
                elapsed_seconds: r.elapsed_seconds,
            })?;
        }
        Results::Verify(outcomes) => {
            for o in outcomes {
                w.serialize(VerifyRow {
                    suite: o.result.suite.name(),
                    identity: &o.result.identity,
                    trials: o.result.trials,
                    max_residual: o.result.max_residual,
                    worst_trial: o.result.worst_trial,
                    passed: o.passed,
                })?;
            }
        }
        Results::Crosscheck(r) => {
            for t in &r.trials {
                for v in &t.values {
                    w.serialize(CrosscheckRow {
                        trial: t.trial,
                        method: v.method.to_string(),
                        value_re: v.value.re,
                        value_im: v.value.im,
                        value_log10_abs: v.value.log10_abs,
                        elapsed_seconds: v.elapsed_seconds,
                    })?;
                }
            }
        }
        Results::Sweep(points) => {
            let target = match &report.config {
                crate::config::RunConfig::Sweep { vary, .. } => *vary,
                _ => unreachable!("sweep results come from a sweep config"),
            };
            for p in points {
                let x = target.get(&p.draw);
                let (z_re, z_im) = split(&p.z);
                w.serialize(SweepRow {
                    index: p.index,
                    parameter: target.to_string(),
                    parameter_re: x.re,
                    parameter_im: x.im,
                    method: p.method.to_string(),
                    z_re,
                    z_im,
                    z_log10_abs: p.z.as_ref().map(|z| z.log10_abs),
                    error: p.error.clone(),
                })?;
            }
        }
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}
