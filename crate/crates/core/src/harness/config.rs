use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use crate::algorithms::{Algorithm, RlsParams, RunBudget, StepOperator};
use crate::error::{Error, Result};
use crate::sampling::{HeavyTailedParams, HeavyTailedSampler, DEFAULT_LOG_BASE};

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_REPETITIONS: u64 = 20;
pub const DEFAULT_EPSILON: f64 = 0.001;
pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_BETA: f64 = 0.5;

/// Which optimizer a run uses, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmSpec {
    EaPm1,
    EaHeavy { epsilon: f64, log_base: f64 },
    Rls { alpha: f64, beta: f64 },
}

impl AlgorithmSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmSpec::EaPm1 => "ea_pm1",
            AlgorithmSpec::EaHeavy { .. } => "ea_heavy",
            AlgorithmSpec::Rls { .. } => "rls",
        }
    }

    /// Parameter echo written to the `param1`/`param2` columns.
    pub fn params(&self) -> (Option<f64>, Option<f64>) {
        match *self {
            AlgorithmSpec::EaPm1 => (None, None),
            AlgorithmSpec::EaHeavy { epsilon, log_base } => (Some(epsilon), Some(log_base)),
            AlgorithmSpec::Rls { alpha, beta } => (Some(alpha), Some(beta)),
        }
    }

    /// Builds the optimizer. The heavy-tailed sampler table is computed here
    /// once and shared by every trial.
    pub fn build(&self) -> Result<Algorithm> {
        Ok(match *self {
            AlgorithmSpec::EaPm1 => Algorithm::ea(StepOperator::PlusMinusOne),
            AlgorithmSpec::EaHeavy { epsilon, log_base } => {
                let params = HeavyTailedParams::with_base(epsilon, log_base)?;
                Algorithm::ea(StepOperator::HeavyTailed(Arc::new(HeavyTailedSampler::new(params)?)))
            }
            AlgorithmSpec::Rls { alpha, beta } => Algorithm::rls(RlsParams::new(alpha, beta)?),
        })
    }

    /// Resolves a label plus the optional parameter settings.
    pub fn from_settings(label: &str, settings: &Settings) -> Result<Self> {
        let spec = match label {
            "ea_pm1" => AlgorithmSpec::EaPm1,
            "ea_heavy" => AlgorithmSpec::EaHeavy {
                epsilon: settings.f64_or("epsilon", DEFAULT_EPSILON)?,
                log_base: settings.f64_or("log-base", DEFAULT_LOG_BASE)?,
            },
            "rls" => AlgorithmSpec::Rls {
                alpha: settings.f64_or("alpha", DEFAULT_ALPHA)?,
                beta: settings.f64_or("beta", DEFAULT_BETA)?,
            },
            other => {
                return Err(Error::invalid(
                    "algo",
                    format!("unknown algorithm `{other}` (expected ea_pm1, ea_heavy or rls)"),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AlgorithmSpec::EaPm1 => Ok(()),
            AlgorithmSpec::EaHeavy { epsilon, log_base } => {
                HeavyTailedParams::with_base(epsilon, log_base).map(|_| ())
            }
            AlgorithmSpec::Rls { alpha, beta } => RlsParams::new(alpha, beta).map(|_| ()),
        }
    }
}

/// Flat `key=value` settings, from a config file and/or command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize_key(key), value.into());
    }

    /// Entries of `other` replace entries of `self`.
    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize_key(key)).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| Error::invalid(key, format!("cannot parse `{v}`")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &'static str, default: f64) -> Result<f64> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &'static str, default: u64) -> Result<u64> {
        match self.get(key) {
            Some(v) => parse_u64_token(v).map_err(|_| Error::invalid(key, format!("cannot parse `{v}`"))),
            None => Ok(default),
        }
    }

    pub fn bool_or(&self, key: &'static str, default: bool) -> Result<bool> {
        Ok(self.parse(key)?.unwrap_or(default))
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-")
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_settings(text: &str) -> Result<Settings> {
    let mut settings = Settings::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("line {}: expected key=value, got `{raw}`", lineno + 1))
        })?;
        if key.trim().is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
        }
        settings.set(key, value.trim());
    }
    Ok(settings)
}

/// A single integer, allowing `10^k` shorthand.
fn parse_u64_token(token: &str) -> std::result::Result<u64, String> {
    let token = token.trim().replace('_', "");
    if let Some((base, exp)) = token.split_once('^') {
        let base: u64 = base.parse().map_err(|_| token.clone())?;
        let exp: u32 = exp.parse().map_err(|_| token.clone())?;
        return base.checked_pow(exp).ok_or(token);
    }
    token.parse().map_err(|_| token)
}

/// Comma-separated integers and `lo:hi:step` ranges (inclusive of `hi` when
/// reachable), with `10^k` shorthand allowed anywhere a number is.
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |s: &str| {
            parse_u64_token(s).map_err(|t| Error::Parse(format!("bad integer `{t}` in `{item}`")))
        };
        match parts.as_slice() {
            [single] => out.push(num(single)?),
            [lo, hi] | [lo, hi, _] => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
                if step == 0 || lo > hi {
                    return Err(Error::Parse(format!("bad range `{item}`")));
                }
                let mut v = lo;
                while v <= hi {
                    out.push(v);
                    match v.checked_add(step) {
                        Some(next) => v = next,
                        None => break,
                    }
                }
            }
            _ => return Err(Error::Parse(format!("bad range `{item}`"))),
        }
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("empty list `{text}`")));
    }
    Ok(out)
}

/// One experiment grid: every `(n, r)` pair, `repetitions` times, on the
/// all-`r` target.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmSpec,
    pub n_values: Vec<usize>,
    pub r_values: Vec<u64>,
    pub repetitions: u64,
    pub max_evaluations: u64,
    pub base_seed: u64,
    /// Clamp offspring into `[0, r]`.
    pub clamp: bool,
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(algorithm: AlgorithmSpec, n_values: Vec<usize>, r_values: Vec<u64>) -> Self {
        Self {
            algorithm,
            n_values,
            r_values,
            repetitions: DEFAULT_REPETITIONS,
            max_evaluations: DEFAULT_BUDGET,
            base_seed: 0,
            clamp: false,
            workers: None,
            output: None,
        }
    }

    pub fn from_settings(settings: &Settings) -> Result<Self> {
        const KNOWN: [&str; 13] = [
            "algo", "n", "r", "reps", "seed", "budget", "out", "epsilon", "log-base", "alpha",
            "beta", "workers", "clamp",
        ];
        if let Some(k) = settings.keys().find(|k| !KNOWN.contains(k)) {
            return Err(Error::invalid("config", format!("unknown key `{k}`")));
        }
        let label = settings
            .get("algo")
            .ok_or_else(|| Error::invalid("algo", "missing"))?;
        let algorithm = AlgorithmSpec::from_settings(label, settings)?;
        let n_values = parse_u64_list(settings.get("n").ok_or_else(|| Error::invalid("n", "missing"))?)?
            .into_iter()
            .map(|n| usize::try_from(n).map_err(|_| Error::invalid("n", "too large")))
            .collect::<Result<Vec<_>>>()?;
        let r_values = parse_u64_list(settings.get("r").ok_or_else(|| Error::invalid("r", "missing"))?)?;
        let workers = match settings.get("workers") {
            Some(_) => Some(settings.u64_or("workers", 0)? as usize),
            None => None,
        };
        let config = Self {
            algorithm,
            n_values,
            r_values,
            repetitions: settings.u64_or("reps", DEFAULT_REPETITIONS)?,
            max_evaluations: settings.u64_or("budget", DEFAULT_BUDGET)?,
            base_seed: settings.u64_or("seed", 0)?,
            clamp: settings.bool_or("clamp", false)?,
            workers,
            output: settings.get("out").map(PathBuf::from),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.algorithm.validate()?;
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::invalid("n", "need at least one value, all >= 1"));
        }
        if self.r_values.is_empty() || self.r_values.contains(&0) {
            return Err(Error::invalid("r", "need at least one value, all >= 1"));
        }
        if let Some(&r) = self.r_values.iter().find(|&&r| r > i64::MAX as u64) {
            return Err(Error::invalid("r", format!("{r} does not fit a signed 64-bit coordinate")));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("reps", "must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers", "must be >= 1"));
        }
        RunBudget::new(self.max_evaluations)?;
        Ok(())
    }
}
