//! Monte Carlo parameter sweeps.
//!
//! For every swept value, trial `t` draws its channel from the stream
//! `(seed, t)`, so all algorithms and all values of a sweep see the same
//! random numbers and thread count cannot change any average.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::model::{realize, CorrelationModel, SystemConfig};
use crate::par::{map_trials, Threads};
use crate::selectors::{Algorithm, DEFAULT_SWAP_ROUNDS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptParameter {
    SnrDb,
    Users,
    RfChains,
    Ports,
    SwapRounds,
}

impl SweptParameter {
    pub const ALL: [SweptParameter; 5] = [
        SweptParameter::SnrDb,
        SweptParameter::Users,
        SweptParameter::RfChains,
        SweptParameter::Ports,
        SweptParameter::SwapRounds,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SweptParameter::SnrDb => "snr_db",
            SweptParameter::Users => "K",
            SweptParameter::RfChains => "L",
            SweptParameter::Ports => "P",
            SweptParameter::SwapRounds => "R",
        }
    }
}

impl fmt::Display for SweptParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SweptParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweptParameter::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sweep parameter '{s}' (expected snr_db, K, L, P or R)")))
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub parameter: SweptParameter,
    pub values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub trials: u64,
    /// Swap rounds for GFwd+S, unless `R` is the swept parameter.
    pub swap_rounds: usize,
    pub threads: Threads,
}

impl SweepSpec {
    pub fn new(base: SystemConfig, parameter: SweptParameter, values: Vec<f64>, algorithms: Vec<Algorithm>) -> Self {
        SweepSpec {
            base,
            parameter,
            values,
            algorithms,
            trials: 100,
            swap_rounds: DEFAULT_SWAP_ROUNDS,
            threads: Threads::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one value".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one algorithm".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        for &v in &self.values {
            self.point(v)?;
        }
        Ok(())
    }

    /// Configuration and swap rounds at one swept value.
    pub fn point(&self, value: f64) -> Result<(SystemConfig, usize)> {
        let mut cfg = self.base.clone();
        let mut rounds = self.swap_rounds;
        let as_count = |v: f64| -> Result<usize> {
            if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidArgument(format!("{} must be a non-negative integer, got {v}", self.parameter)))
            }
        };
        match self.parameter {
            SweptParameter::SnrDb => cfg.snr_db = value,
            SweptParameter::Users => cfg = cfg.with_users(as_count(value)?),
            SweptParameter::RfChains => cfg.rf_chains = as_count(value)?,
            SweptParameter::Ports => cfg.ports = as_count(value)?,
            SweptParameter::SwapRounds => rounds = as_count(value)?,
        }
        cfg.validate()?;
        Ok((cfg, rounds))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub swept_param: SweptParameter,
    pub value: f64,
    pub algorithm: Algorithm,
    /// Per-user spectral efficiency, bits/s/Hz.
    pub mean_se: f64,
    /// Sample standard deviation across trials.
    pub std_se: f64,
    pub trials: u64,
    pub mean_runtime_us: f64,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 8] = [
    "swept_param",
    "value",
    "algorithm",
    "mean_se",
    "std_se",
    "trials",
    "mean_runtime_us",
    "seed",
];

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let mut records = Vec::with_capacity(spec.values.len() * spec.algorithms.len());
    for &value in &spec.values {
        let (cfg, rounds) = spec.point(value)?;
        let corr = CorrelationModel::for_config(&cfg)?;
        let per_trial: Vec<Result<Vec<(f64, f64)>>> = map_trials(spec.trials, spec.threads, |trial| {
            let (_, model) = realize(&corr, &cfg, trial)?;
            spec.algorithms
                .iter()
                .map(|alg| {
                    let start = Instant::now();
                    let sel = alg.select(&model, cfg.rf_chains, rounds)?;
                    Ok((sel.se, start.elapsed().as_secs_f64() * 1e6))
                })
                .collect()
        });
        let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

        for (a, &algorithm) in spec.algorithms.iter().enumerate() {
            let se: Vec<f64> = per_trial.iter().map(|t| t[a].0).collect();
            let runtime: Vec<f64> = per_trial.iter().map(|t| t[a].1).collect();
            let (mean_se, std_se) = mean_std(&se);
            records.push(SweepRecord {
                swept_param: spec.parameter,
                value,
                algorithm,
                mean_se,
                std_se,
                trials: spec.trials,
                mean_runtime_us: mean_std(&runtime).0,
                seed: cfg.seed,
            });
        }
    }
    Ok(records)
}

/// Mean and sample standard deviation (0 for a single sample).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Writes the sweep CSV. With `with_runtime = false` the runtime column is
/// written as 0 so that the file depends only on the seed.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W, with_runtime: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let runtime = if with_runtime { r.mean_runtime_us } else { 0.0 };
        w.write_record([
            r.swept_param.id().to_string(),
            r.value.to_string(),
            r.algorithm.id().to_string(),
            r.mean_se.to_string(),
            r.std_se.to_string(),
            r.trials.to_string(),
            runtime.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
