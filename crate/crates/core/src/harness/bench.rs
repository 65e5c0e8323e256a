//! Wall-clock timing of the selectors.

use std::time::Instant;

use crate::model::{realize, CorrelationModel, SystemConfig};
use crate::selectors::Algorithm;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub algorithm: Algorithm,
    pub complexity: &'static str,
    /// Median wall-clock time of one selector call.
    pub median_us: f64,
    pub mean_se: f64,
}

/// Times each algorithm on `trials` channel draws. Channel sampling and
/// matrix assembly are excluded; every call runs on the calling thread.
pub fn bench_timing(cfg: &SystemConfig, algorithms: &[Algorithm], trials: u64, swap_rounds: usize) -> Result<Vec<TimingRow>> {
    if trials < 10 {
        return Err(Error::InvalidArgument(format!("timing needs at least 10 trials, got {trials}")));
    }
    cfg.validate()?;
    let corr = CorrelationModel::for_config(cfg)?;
    let models = (0..trials)
        .map(|t| realize(&corr, cfg, t).map(|(_, m)| m))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(algorithms.len());
    for &alg in algorithms {
        // Warm-up call, not timed.
        alg.select(&models[0], cfg.rf_chains, swap_rounds)?;
        let mut times = Vec::with_capacity(models.len());
        let mut se = 0.0;
        for m in &models {
            let start = Instant::now();
            let sel = alg.select(m, cfg.rf_chains, swap_rounds)?;
            times.push(start.elapsed().as_secs_f64() * 1e6);
            se += sel.se;
        }
        rows.push(TimingRow {
            algorithm: alg,
            complexity: alg.complexity(),
            median_us: median(&mut times),
            mean_se: se / trials as f64,
        });
    }
    Ok(rows)
}

/// Ratio of median GFwd runtimes at `2P` and `P` ports, other parameters fixed.
pub fn gfwd_port_scaling(cfg: &SystemConfig, trials: u64) -> Result<f64> {
    let mut doubled = cfg.clone();
    doubled.ports *= 2;
    let base = bench_timing(cfg, &[Algorithm::Gfwd], trials, 0)?[0].median_us;
    let big = bench_timing(&doubled, &[Algorithm::Gfwd], trials, 0)?[0].median_us;
    Ok(big / base)
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Fixed-width table in the layout of a complexity / latency comparison.
pub fn format_table(cfg: &SystemConfig, rows: &[TimingRow], swap_rounds: usize) -> String {
    let mut s = format!(
        "P={}, L={}, K={}, N_t={}, R={}, SNR={} dB\n{:<12} {:<16} {:>12} {:>10}\n",
        cfg.ports, cfg.rf_chains, cfg.users, cfg.bs_antennas, swap_rounds, cfg.snr_db, "method", "complexity", "time (ms)", "mean SE"
    );
    for r in rows {
        s += &format!(
            "{:<12} {:<16} {:>12.4} {:>10.4}\n",
            r.algorithm.id(),
            r.complexity,
            r.median_us / 1e3,
            r.mean_se
        );
    }
    s
}
