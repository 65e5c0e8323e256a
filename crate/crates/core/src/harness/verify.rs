//! Randomised invariant suites run by `famasel verify`.
//!
//! * `monotonicity`: adding a port never lowers the optimal SINR.
//! * `gev-consistency`: the closed-form rank-one solution agrees with the
//!   general whitening solver, and the returned combiner attains the reported
//!   SINR when the SINR is evaluated term by term from the channel.
//! * `ordering`: per-instance dominance relations between the selectors.

use rand::seq::index::sample;
use rand::Rng;

use crate::gev::{dominant_gev, rank1_gev, restrict, restrict_vector, subset_sinr, PortSet};
use crate::model::{realize, trial_rng, CorrelationModel, SignalModel, SystemConfig};
use crate::par::{map_trials, Threads};
use crate::selectors::{select_dc, select_exhaustive, select_gfwd, select_gfwd_swap, select_slow_fama, Algorithm};
use crate::Result;

/// Relative slack allowed by the monotonicity and ordering checks.
pub const ORDER_TOL: f64 = 1e-9;
pub const LAMBDA_TOL: f64 = 1e-9;
pub const QUOTIENT_TOL: f64 = 1e-8;

/// Offset separating the subset-sampling streams from the channel streams.
const SUBSET_STREAM: u64 = 1 << 62;

/// Function evaluating `lambda_max(A_S, B_S)`.
pub type SinrOracle = dyn Fn(&SignalModel, &PortSet) -> Result<f64> + Sync;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Monotonicity triples; the other suites use a tenth of this.
    pub trials: u64,
    pub seed: u64,
    pub threads: Threads,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 10_000,
            seed: 0,
            threads: Threads::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub total: u64,
    pub passed: u64,
    /// Descriptions of the first failures.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }

    fn collect(name: &'static str, outcomes: Vec<Result<Option<String>>>) -> Result<Self> {
        let total = outcomes.len() as u64;
        let mut failures = Vec::new();
        let mut passed = 0;
        for o in outcomes {
            match o? {
                None => passed += 1,
                Some(msg) => failures.push(msg),
            }
        }
        failures.truncate(20);
        Ok(SuiteReport {
            name,
            total,
            passed,
            failures,
        })
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.ok() { "ok" } else { "FAILED" };
        write!(f, "{}: {}/{} {}", self.name, self.passed, self.total, status)?;
        for msg in &self.failures {
            write!(f, "\n  {msg}")?;
        }
        Ok(())
    }
}

const SNR_GRID: [f64; 4] = [0.0, 10.0, 20.0, 30.0];

fn suite_config(ports: usize, rf_chains: usize, users: usize, seed: u64) -> SystemConfig {
    SystemConfig {
        ports,
        rf_chains,
        users,
        bs_antennas: users,
        aperture: 4.0,
        snr_db: 0.0,
        seed,
        user_index: 0,
    }
}

fn instance(corr: &CorrelationModel, base: &SystemConfig, trial: u64) -> Result<(crate::ChannelRealization, SignalModel)> {
    let mut cfg = base.clone();
    cfg.snr_db = SNR_GRID[(trial % SNR_GRID.len() as u64) as usize];
    realize(corr, &cfg, trial)
}

fn exceeds(lower: f64, upper: f64) -> bool {
    upper < lower * (1.0 - ORDER_TOL)
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `lambda(S ∪ {p}) >= lambda(S)` on random triples with `P = 32`, `K = 4`.
pub fn monotonicity(opts: &VerifyOptions, oracle: &SinrOracle) -> Result<SuiteReport> {
    let base = suite_config(32, 1, 4, opts.seed);
    let corr = CorrelationModel::for_config(&base)?;
    let outcomes = map_trials(opts.trials, opts.threads, |trial| {
        let (_, model) = instance(&corr, &base, trial)?;
        let mut rng = trial_rng(opts.seed, SUBSET_STREAM + trial);
        let size = rng.random_range(1..base.ports);
        let picks = sample(&mut rng, base.ports, size + 1).into_vec();
        let (extra, rest) = picks.split_last().expect("size + 1 >= 2 picks");
        let set = PortSet::new(rest.to_vec(), base.ports)?;
        let grown = set.with(*extra);
        let before = oracle(&model, &set)?;
        let after = oracle(&model, &grown)?;
        Ok(exceeds(before, after).then(|| {
            format!("seed {} trial {trial}: S={set} p={extra}: {after} < {before}", opts.seed)
        }))
    });
    SuiteReport::collect("monotonicity", outcomes)
}

/// Rank-one versus general solver, plus term-by-term SINR at the combiner.
pub fn gev_consistency(opts: &VerifyOptions) -> Result<SuiteReport> {
    let base = suite_config(16, 1, 4, opts.seed);
    let corr = CorrelationModel::for_config(&base)?;
    let n = (opts.trials / 10).max(1);
    let outcomes = map_trials(n, opts.threads, |trial| {
        let (ch, model) = instance(&corr, &base, trial)?;
        let mut rng = trial_rng(opts.seed, SUBSET_STREAM + trial);
        let size = rng.random_range(1..=base.ports);
        let set = PortSet::new(sample(&mut rng, base.ports, size).into_vec(), base.ports)?;
        let g = restrict_vector(&model.g, &set)?;
        let b = restrict(&model.b, &set)?;
        let closed = rank1_gev(&g, &b)?;
        let general = dominant_gev(&restrict(&model.a, &set)?, &b)?;
        let lam_err = rel_err(closed.lambda_max, general.lambda_max);
        let direct = ch.combiner_sinr(base.users, 0, set.indices(), &closed.w)?;
        let q_err = rel_err(direct, closed.lambda_max);
        Ok((lam_err > LAMBDA_TOL || q_err > QUOTIENT_TOL).then(|| {
            format!(
                "seed {} trial {trial}: S={set}: lambda rel err {lam_err:.3e}, quotient rel err {q_err:.3e}",
                opts.seed
            )
        }))
    });
    SuiteReport::collect("gev-consistency", outcomes)
}

/// Per-instance orderings on `P = 12`, `L = 3`, `K = 4`.
pub fn ordering(opts: &VerifyOptions) -> Result<SuiteReport> {
    let base = suite_config(12, 3, 4, opts.seed);
    let corr = CorrelationModel::for_config(&base)?;
    let n = (opts.trials / 10).max(1);
    let outcomes = map_trials(n, opts.threads, |trial| {
        let (_, model) = instance(&corr, &base, trial)?;
        check_orderings(&model, base.rf_chains)
            .map(|v| v.map(|msg| format!("seed {} trial {trial}: {msg}", opts.seed)))
    });
    SuiteReport::collect("ordering", outcomes)
}

/// Returns the first violated ordering on one instance, if any.
pub fn check_orderings(model: &SignalModel, rf_chains: usize) -> Result<Option<String>> {
    let sfama = select_slow_fama(model);
    let dc = select_dc(model, rf_chains)?;
    let gfwd = select_gfwd(model, rf_chains)?;
    let gfwds = select_gfwd_swap(model, rf_chains, 3)?;
    let ex = select_exhaustive(model, rf_chains)?;

    if exceeds(gfwd.se, gfwds.se) {
        return Ok(Some(format!("gfwds SE {} < gfwd SE {}", gfwds.se, gfwd.se)));
    }
    if exceeds(sfama.se, dc.se) {
        return Ok(Some(format!("dc SE {} < sfama SE {}", dc.se, sfama.se)));
    }
    let step = gfwd.trace.as_ref().map(|t| t.step_sinr[0]);
    if step != Some(sfama.sinr) {
        return Ok(Some(format!("gfwd first step {step:?} != best single port {}", sfama.sinr)));
    }
    for alg in Algorithm::ALL {
        let other = alg.select(model, rf_chains, 3)?;
        if exceeds(other.se, ex.se) {
            return Ok(Some(format!("{alg} SE {} beats exhaustive {}", other.se, ex.se)));
        }
    }
    Ok(None)
}

/// Runs all three suites with the reference SINR evaluator.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    run_all_with(opts, &subset_sinr)
}

/// As [`run_all`], with the monotonicity suite driven by `oracle`.
pub fn run_all_with(opts: &VerifyOptions, oracle: &SinrOracle) -> Result<Vec<SuiteReport>> {
    Ok(vec![monotonicity(opts, oracle)?, gev_consistency(opts)?, ordering(opts)?])
}
