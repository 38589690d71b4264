//! Execution of a [`RunConfig`] into a [`Report`].

use rdw_core::determinant::{
    full_partition, normalized_partition, prefactor_with, DetDiagnostics, Method, PrefactorForm,
};
use rdw_core::linalg::ExtRecord;
use rdw_core::verify::{crosscheck, run_suite, CrosscheckReport, IdentityResult};
use rdw_core::{ModelParams, C64};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub passed: bool,
    pub results: Results,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Results {
    Compute(ComputeResult),
    Verify(Vec<IdentityOutcome>),
    Crosscheck(CrosscheckReport),
    Sweep(Vec<SweepPoint>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeResult {
    pub method: Method,
    pub n: usize,
    /// Full partition function `Z_N`.
    pub z: ExtRecord,
    /// Normalized partition function; formula methods only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<ExtRecord>,
    /// Prefactor with `Z_N = prefactor · normalized`; formula methods only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<ExtRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefactor_form: Option<PrefactorForm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DetDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityOutcome {
    #[serde(flatten)]
    pub result: IdentityResult,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub method: Method,
    pub draw: ModelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<ExtRecord>,
    /// Why the point could not be evaluated (for example a pole).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn run(config: RunConfig) -> CliResult<Report> {
    config.validate()?;
    let (passed, results) = match &config {
        RunConfig::Compute {
            method,
            prefactor,
            params,
            timings,
        } => (
            true,
            Results::Compute(run_compute(*method, *prefactor, params, *timings)?),
        ),
        RunConfig::Verify {
            suites,
            trials,
            seed,
            tol,
        } => {
            let mut out = Vec::new();
            for &suite in suites {
                // Every suite starts from the same seed, so running one suite
                // alone reproduces its part of an `all` run.
                for result in run_suite(suite, *trials, *seed)? {
                    let passed = result.passes(*tol);
                    out.push(IdentityOutcome { result, passed });
                }
            }
            (out.iter().all(|o| o.passed), Results::Verify(out))
        }
        RunConfig::Crosscheck {
            n,
            methods,
            trials,
            seed,
            tol,
            prefactor,
            timings,
        } => {
            let report = crosscheck(*n, methods, *trials, *seed, *prefactor, *timings)?;
            (report.passes(*tol), Results::Crosscheck(report))
        }
        RunConfig::Sweep {
            method,
            prefactor,
            params,
            vary,
            from,
            to,
            steps,
        } => {
            vary.check(params.n)?;
            if !method.supports(params.n) {
                return Err(rdw_core::Error::SizeLimit {
                    method: method.name(),
                    n: params.n,
                    max: method.max_n().unwrap_or(usize::MAX),
                }
                .into());
            }
            let base = vary.get(params);
            let (a, b) = (from.resolve(base), to.resolve(base));
            let points = (0..*steps)
                .map(|k| {
                    let t = if *steps == 1 {
                        0.0
                    } else {
                        k as f64 / (*steps - 1) as f64
                    };
                    let draw = vary.set(params, a + (b - a) * t);
                    let z = full_partition(&draw, *method, *prefactor);
                    let (z, error) = match z {
                        Ok(r) => (Some(r.value.into()), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    SweepPoint {
                        index: k,
                        method: *method,
                        draw,
                        z,
                        error,
                    }
                })
                .collect::<Vec<_>>();
            (true, Results::Sweep(points))
        }
    };
    Ok(Report {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        config,
        passed,
        results,
    })
}

fn run_compute(method: Method, form: PrefactorForm, p: &ModelParams, timings: bool) -> CliResult<ComputeResult> {
    let full = full_partition(p, method, form)?;
    let (normalized, prefactor) = if method.is_oracle() {
        (None, None)
    } else {
        let norm = normalized_partition(p, method)?;
        (Some(norm.value.into()), Some(prefactor_with(form, p)?.value.into()))
    };
    Ok(ComputeResult {
        method,
        n: p.n,
        z: full.value.into(),
        normalized,
        prefactor,
        prefactor_form: full.prefactor_form,
        diagnostics: full.diagnostics,
        elapsed_seconds: timings.then_some(full.elapsed.as_secs_f64()),
    })
}

/// Parses a comma-separated method list; `all` selects every method that
/// supports `n`.
pub fn parse_methods(list: &str, n: usize) -> CliResult<Vec<Method>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.into_iter().filter(|m| m.supports(n)).collect());
    }
    let mut out: Vec<Method> = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: Method = item.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.len() < 2 {
        return Err(CliError::Argument(
            "crosscheck needs at least two distinct methods".into(),
        ));
    }
    Ok(out)
}

/// The part of a report needed to run it again.
#[derive(Debug, Deserialize)]
pub struct Echo {
    pub config: RunConfig,
}

/// One-line summary for stderr.
pub fn summary(report: &Report) -> String {
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    let detail = match &report.results {
        Results::Compute(r) => format!("{} N={}: Z = {}", r.method, r.n, show(&r.z)),
        Results::Verify(v) => {
            let worst = v
                .iter()
                .map(|o| o.result.max_residual)
                .fold(0.0f64, |a, b| if b > a || b.is_nan() { b } else { a });
            let failed = v.iter().filter(|o| !o.passed).count();
            format!("{} identities, {failed} failed, max residual {worst:.3e}", v.len())
        }
        Results::Crosscheck(r) => {
            let worst = r.pairs.iter().map(|p| p.max_rel_diff).fold(0.0f64, f64::max);
            let mut s = format!(
                "N={}, {} pairs, max relative difference {worst:.3e}",
                r.n,
                r.pairs.len()
            );
            if let Some(c) = &r.calibration {
                s += &format!(
                    "; odd-N prefactor hypothesis M={} {} (correction ratio {}, {})",
                    c.m_used,
                    if c.hypothesis_holds { "holds" } else { "fails" },
                    show_c(C64::new(c.correction_ratio.re, c.correction_ratio.im)),
                    if c.consistent { "consistent" } else { "inconsistent" }
                );
            }
            s
        }
        Results::Sweep(points) => {
            let bad = points.iter().filter(|p| p.error.is_some()).count();
            format!("{} points, {bad} not evaluated", points.len())
        }
    };
    format!("{}: {verdict}: {detail}", report.config.name())
}

fn show(z: &ExtRecord) -> String {
    if z.re.is_finite() && z.im.is_finite() && (z.re != 0.0 || z.im != 0.0 || z.log10_abs == f64::NEG_INFINITY) {
        show_c(C64::new(z.re, z.im))
    } else {
        format!("(|Z| = 10^{:.3})", z.log10_abs)
    }
}

fn show_c(z: C64) -> String {
    format!("{:.12e}{:+.12e}i", z.re, z.im)
}
