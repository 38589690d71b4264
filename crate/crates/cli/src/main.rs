//! `rdw`: partition functions of the open-boundary six-vertex model with
//! domain-wall boundaries, their cross-checks and identity suites.
//!
//! Exit codes: 0 pass, 2 input or parameter error, 3 size limit,
//! 4 verification failure.

// `!(x > 0.0)` comparisons are deliberate so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod params;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rdw_core::determinant::{Method, PrefactorForm};
use rdw_core::verify::Suite;

use crate::commands::{parse_methods, run, summary, Echo};
use crate::config::{ComplexArg, Format, RunConfig, SweepTarget};
use crate::error::{CliError, CliResult, EXIT_PASS, EXIT_VERIFICATION};
use crate::params::{load_params, validate};

#[derive(Parser)]
#[command(name = "rdw", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Partition function of one parameter file by one method.
    Compute {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// JSON parameter file.
        #[arg(long)]
        params: PathBuf,
        /// Prefactor relating the normalized to the full partition function.
        #[arg(long, value_parser = parse_form, default_value = "derived")]
        form: PrefactorForm,
        /// Include wall-clock timings (makes the report non-reproducible).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximum residual of an identity suite over seeded random draws.
    Verify {
        /// Suite name, or `all` for every suite at the rounding floor.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pairwise agreement of several methods over seeded random draws.
    Crosscheck {
        #[arg(long)]
        n: usize,
        /// Comma-separated method names, or `all` for every method
        /// supporting N.
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_parser = parse_form, default_value = "derived")]
        form: PrefactorForm,
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Partition function along a straight line in one parameter.
    Sweep {
        #[arg(long)]
        params: PathBuf,
        /// eta, zeta, lambda1, lambda2, uK or xiK (1-based K).
        #[arg(long, value_parser = parse_target)]
        vary: SweepTarget,
        /// Start value: `re` (keeping the file's imaginary part) or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        from: ComplexArg,
        #[arg(long, allow_hyphen_values = true)]
        to: ComplexArg,
        /// Number of points, endpoints included.
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, value_parser = parse_method, default_value = "determinant")]
        method: Method,
        #[arg(long, value_parser = parse_form, default_value = "derived")]
        form: PrefactorForm,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-run the configuration echoed in a JSON report.
    Rerun {
        /// A report written by any other subcommand.
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: rdw_core::Error| e.to_string())
}

fn parse_form(s: &str) -> Result<PrefactorForm, String> {
    s.parse().map_err(|e: rdw_core::Error| e.to_string())
}

fn parse_target(s: &str) -> Result<SweepTarget, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn configure(command: Command) -> CliResult<(RunConfig, OutputArgs)> {
    Ok(match command {
        Command::Compute {
            method,
            params,
            form,
            timings,
            output,
        } => {
            let params = load_params(&params)?;
            (
                RunConfig::Compute {
                    method,
                    prefactor: form,
                    params,
                    timings,
                },
                output,
            )
        }
        Command::Verify {
            suite,
            trials,
            seed,
            tol,
            output,
        } => {
            let suites = Suite::parse_selection(&suite)?;
            (
                RunConfig::Verify {
                    suites,
                    trials,
                    seed,
                    tol,
                },
                output,
            )
        }
        Command::Crosscheck {
            n,
            methods,
            trials,
            seed,
            tol,
            form,
            timings,
            output,
        } => {
            let methods = parse_methods(&methods, n)?;
            (
                RunConfig::Crosscheck {
                    n,
                    methods,
                    trials,
                    seed,
                    tol,
                    prefactor: form,
                    timings,
                },
                output,
            )
        }
        Command::Sweep {
            params,
            vary,
            from,
            to,
            steps,
            method,
            form,
            output,
        } => {
            let params = load_params(&params)?;
            (
                RunConfig::Sweep {
                    method,
                    prefactor: form,
                    params,
                    vary,
                    from,
                    to,
                    steps,
                },
                output,
            )
        }
        Command::Rerun { report, output } => {
            let text = fs::read_to_string(&report).map_err(|source| CliError::Io {
                path: report.clone(),
                source,
            })?;
            let echo: Echo = serde_json::from_str(&text).map_err(|e| CliError::Parse {
                path: report.clone(),
                message: e.to_string(),
            })?;
            let config = match echo.config {
                RunConfig::Compute {
                    method,
                    prefactor,
                    params,
                    timings,
                } => {
                    let params = validate(params, &report)?;
                    RunConfig::Compute {
                        method,
                        prefactor,
                        params,
                        timings,
                    }
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
                    let params = validate(params, &report)?;
                    RunConfig::Sweep {
                        method,
                        prefactor,
                        params,
                        vary,
                        from,
                        to,
                        steps,
                    }
                }
                other => other,
            };
            (config, output)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure(cli.command).and_then(|(config, output)| {
        let report = run(config)?;
        output::write_report(&report, output.format, output.out.as_deref())?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            eprintln!("{}", summary(&report));
            ExitCode::from(if report.passed { EXIT_PASS } else { EXIT_VERIFICATION })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
