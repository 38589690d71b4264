//! The run configuration echoed into every report. A report's `config` is
//! enough to re-run it: parameter files are inlined, seeds recorded.

use std::fmt;
use std::str::FromStr;

use rdw_core::determinant::{Method, PrefactorForm};
use rdw_core::verify::Suite;
use rdw_core::{ModelParams, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum RunConfig {
    Compute {
        method: Method,
        prefactor: PrefactorForm,
        params: ModelParams,
        timings: bool,
    },
    Verify {
        suites: Vec<Suite>,
        trials: usize,
        seed: u64,
        tol: f64,
    },
    Crosscheck {
        n: usize,
        methods: Vec<Method>,
        trials: usize,
        seed: u64,
        tol: f64,
        prefactor: PrefactorForm,
        timings: bool,
    },
    Sweep {
        method: Method,
        prefactor: PrefactorForm,
        params: ModelParams,
        vary: SweepTarget,
        from: ComplexArg,
        to: ComplexArg,
        steps: usize,
    },
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Compute { .. } => "compute",
            RunConfig::Verify { .. } => "verify",
            RunConfig::Crosscheck { .. } => "crosscheck",
            RunConfig::Sweep { .. } => "sweep",
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let (trials, tol) = match self {
            RunConfig::Verify { trials, tol, .. } | RunConfig::Crosscheck { trials, tol, .. } => (*trials, *tol),
            RunConfig::Sweep { steps, .. } => (*steps, 1.0),
            RunConfig::Compute { .. } => (1, 1.0),
        };
        if trials == 0 {
            return Err(CliError::Argument("trials and steps must be at least 1".into()));
        }
        if !(tol > 0.0) {
            return Err(CliError::Argument(format!("tol must be positive, got {tol}")));
        }
        Ok(())
    }
}

/// Parameter varied by `sweep`: `eta`, `zeta`, `lambda1`, `lambda2`, `uK`
/// or `xiK` with 1-based `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTarget {
    Eta,
    Zeta,
    Lambda(usize),
    U(usize),
    Xi(usize),
}

impl SweepTarget {
    pub fn get(&self, p: &ModelParams) -> C64 {
        match *self {
            SweepTarget::Eta => p.eta,
            SweepTarget::Zeta => p.zeta,
            SweepTarget::Lambda(k) => p.lambda.component(k - 1),
            SweepTarget::U(k) => p.u[k - 1],
            SweepTarget::Xi(k) => p.xi[k - 1],
        }
    }

    pub fn set(&self, p: &ModelParams, value: C64) -> ModelParams {
        let mut q = p.clone();
        match *self {
            SweepTarget::Eta => q.eta = value,
            SweepTarget::Zeta => q.zeta = value,
            SweepTarget::Lambda(1) => q.lambda = rdw_core::WeightVector::new(value, p.lambda.m2()),
            SweepTarget::Lambda(_) => q.lambda = rdw_core::WeightVector::new(p.lambda.m1(), value),
            SweepTarget::U(k) => q.u[k - 1] = value,
            SweepTarget::Xi(k) => q.xi[k - 1] = value,
        }
        q
    }

    /// Whether the target exists for `n` sites.
    pub fn check(&self, n: usize) -> Result<(), CliError> {
        let ok = match *self {
            SweepTarget::U(k) | SweepTarget::Xi(k) => (1..=n).contains(&k),
            SweepTarget::Lambda(k) => (1..=2).contains(&k),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(CliError::Argument(format!(
                "sweep target {self} does not exist for n = {n}"
            )))
        }
    }
}

impl fmt::Display for SweepTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepTarget::Eta => f.write_str("eta"),
            SweepTarget::Zeta => f.write_str("zeta"),
            SweepTarget::Lambda(k) => write!(f, "lambda{k}"),
            SweepTarget::U(k) => write!(f, "u{k}"),
            SweepTarget::Xi(k) => write!(f, "xi{k}"),
        }
    }
}

impl FromStr for SweepTarget {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        let bad = || {
            CliError::Argument(format!(
                "unknown sweep target '{s}' (eta, zeta, lambda1, lambda2, uK, xiK)"
            ))
        };
        let index = |rest: &str| rest.parse::<usize>().ok().filter(|&k| k >= 1).ok_or_else(bad);
        match key.as_str() {
            "eta" => Ok(SweepTarget::Eta),
            "zeta" => Ok(SweepTarget::Zeta),
            _ => {
                if let Some(rest) = key.strip_prefix("lambda") {
                    Ok(SweepTarget::Lambda(index(rest)?))
                } else if let Some(rest) = key.strip_prefix("xi") {
                    Ok(SweepTarget::Xi(index(rest)?))
                } else if let Some(rest) = key.strip_prefix('u') {
                    Ok(SweepTarget::U(index(rest)?))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl Serialize for SweepTarget {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SweepTarget {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A sweep endpoint: `re` alone keeps the imaginary part of the parameter
/// file, `re,im` sets both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexArg {
    pub re: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub im: Option<f64>,
}

impl ComplexArg {
    pub fn resolve(&self, base: C64) -> C64 {
        C64::new(self.re, self.im.unwrap_or(base.im))
    }
}

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
        match s.split_once(',') {
            Some((re, im)) => Ok(ComplexArg {
                re: num(re)?,
                im: Some(num(im)?),
            }),
            None => Ok(ComplexArg { re: num(s)?, im: None }),
        }
    }
}
