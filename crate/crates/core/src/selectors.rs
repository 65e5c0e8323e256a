//! Port-selection algorithms.
//!
//! Every selector is a pure function of `(model, L, R)`. Ties are always
//! broken towards the lowest port index (lexicographically smallest set for
//! the exhaustive search), and candidate loops are sequential so the outcome
//! never depends on scheduling.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::gev::{combiner_sinr, spectral_efficiency, subset_gev, subset_sinr, GevSolution, PortSet};
use crate::model::SignalModel;
use crate::{Error, Result, C64};

/// Default number of swap rounds for GFwd+S.
pub const DEFAULT_SWAP_ROUNDS: usize = 3;

/// Largest number of subsets [`select_exhaustive`] will enumerate.
pub const EXHAUSTIVE_BUDGET: u128 = 1_000_000;

/// Relative margin a swap must beat the incumbent SINR by.
const SWAP_IMPROVEMENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Single best port.
    #[serde(rename = "sfama")]
    SlowFama,
    /// `L` individually best ports, GEV combined.
    Dc,
    /// Phase-aligned ports with equal-gain combining.
    Cuma,
    /// Greedy forward selection.
    Gfwd,
    /// Greedy forward selection with swap refinement.
    #[serde(rename = "gfwds")]
    GfwdSwap,
    /// Backward elimination by combiner magnitude.
    #[serde(rename = "geport")]
    GePort,
    Exhaustive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::SlowFama,
        Algorithm::Dc,
        Algorithm::Cuma,
        Algorithm::Gfwd,
        Algorithm::GfwdSwap,
        Algorithm::GePort,
        Algorithm::Exhaustive,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::SlowFama => "sfama",
            Algorithm::Dc => "dc",
            Algorithm::Cuma => "cuma",
            Algorithm::Gfwd => "gfwd",
            Algorithm::GfwdSwap => "gfwds",
            Algorithm::GePort => "geport",
            Algorithm::Exhaustive => "exhaustive",
        }
    }

    /// Asymptotic cost, as printed by the timing table.
    pub fn complexity(self) -> &'static str {
        match self {
            Algorithm::SlowFama => "O(PK)",
            Algorithm::Dc => "O(PK + L^3)",
            Algorithm::Cuma => "O(P)",
            Algorithm::Gfwd => "O(PL^4)",
            Algorithm::GfwdSwap => "O(RPL^4)",
            Algorithm::GePort => "O((P-L)P^3)",
            Algorithm::Exhaustive => "O(C(P,L) L^3)",
        }
    }

    /// Runs the selector. `swap_rounds` only affects [`Algorithm::GfwdSwap`].
    pub fn select(self, model: &SignalModel, rf_chains: usize, swap_rounds: usize) -> Result<PortSelection> {
        match self {
            Algorithm::SlowFama => Ok(select_slow_fama(model)),
            Algorithm::Dc => select_dc(model, rf_chains),
            Algorithm::Cuma => select_cuma(model, rf_chains),
            Algorithm::Gfwd => select_gfwd(model, rf_chains),
            Algorithm::GfwdSwap => select_gfwd_swap(model, rf_chains, swap_rounds),
            Algorithm::GePort => select_geport(model, rf_chains),
            Algorithm::Exhaustive => select_exhaustive(model, rf_chains),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| {
                let ids: Vec<_> = Algorithm::ALL.iter().map(|a| a.id()).collect();
                Error::InvalidArgument(format!("unknown algorithm '{s}' (expected one of {})", ids.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapEvent {
    pub round: usize,
    pub removed: usize,
    pub added: usize,
    pub sinr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    /// SINR after each greedy insertion.
    pub step_sinr: Vec<f64>,
    /// Accepted swaps, in order.
    pub swaps: Vec<SwapEvent>,
    /// Swap rounds actually executed.
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortSelection {
    pub ports: PortSet,
    /// Unit-norm combiner, entry `i` weights `ports.indices()[i]`.
    pub w: DVector<C64>,
    pub sinr: f64,
    pub se: f64,
    pub algorithm: Algorithm,
    pub trace: Option<SelectionTrace>,
}

impl PortSelection {
    fn from_gev(ports: PortSet, sol: GevSolution, algorithm: Algorithm, trace: Option<SelectionTrace>) -> Self {
        Self::new(ports, sol.w, sol.lambda_max, algorithm, trace)
    }

    fn new(ports: PortSet, w: DVector<C64>, sinr: f64, algorithm: Algorithm, trace: Option<SelectionTrace>) -> Self {
        let sinr = sinr.max(0.0);
        PortSelection {
            ports,
            w,
            sinr,
            se: spectral_efficiency(sinr).unwrap_or(0.0),
            algorithm,
            trace,
        }
    }
}

fn check_chains(model: &SignalModel, rf_chains: usize) -> Result<()> {
    let p = model.ports();
    if rf_chains == 0 || rf_chains > p {
        return Err(Error::InvalidArgument(format!("L must lie in [1, {p}], got {rf_chains}")));
    }
    Ok(())
}

/// First index attaining the maximum of `score` over `candidates`.
fn argmax<I, F>(candidates: I, mut score: F) -> Result<Option<(usize, f64)>>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(usize) -> Result<f64>,
{
    let mut best: Option<(usize, f64)> = None;
    for p in candidates {
        let v = score(p)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((p, v));
        }
    }
    Ok(best)
}

/// Ports ordered by decreasing single-port SINR, lowest index first on ties.
fn ports_by_sinr(model: &SignalModel) -> Vec<usize> {
    let sinr: Vec<f64> = (0..model.ports()).map(|p| model.port_sinr(p)).collect();
    let mut order: Vec<usize> = (0..model.ports()).collect();
    order.sort_by(|&i, &j| sinr[j].total_cmp(&sinr[i]).then(i.cmp(&j)));
    order
}

pub fn select_slow_fama(model: &SignalModel) -> PortSelection {
    let best = ports_by_sinr(model)[0];
    PortSelection::new(
        PortSet::single(best),
        DVector::from_element(1, C64::from(1.0)),
        model.port_sinr(best),
        Algorithm::SlowFama,
        None,
    )
}

pub fn select_dc(model: &SignalModel, rf_chains: usize) -> Result<PortSelection> {
    check_chains(model, rf_chains)?;
    let mut top: Vec<usize> = ports_by_sinr(model).into_iter().take(rf_chains).collect();
    top.sort_unstable();
    let ports = PortSet::from_sorted_unchecked(top);
    let sol = subset_gev(model, &ports)?;
    Ok(PortSelection::from_gev(ports, sol, Algorithm::Dc, None))
}

/// Rotates `g` so the strongest port is real positive, keeps the `L` ports with
/// the largest real part (positive ones first, then padding), and combines
/// them with equal weights `1 / sqrt(L)`.
pub fn select_cuma(model: &SignalModel, rf_chains: usize) -> Result<PortSelection> {
    check_chains(model, rf_chains)?;
    let g = &model.g;
    let strongest = (0..g.len()).fold(0, |best, p| if g[p].norm() > g[best].norm() { p } else { best });
    let derotate = C64::from_polar(1.0, -g[strongest].arg());
    let aligned: Vec<f64> = g.iter().map(|z| (z * derotate).re).collect();

    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&i, &j| aligned[j].total_cmp(&aligned[i]).then(i.cmp(&j)));
    // Sorting by real part puts every positive port ahead of the padding.
    let mut chosen: Vec<usize> = order.into_iter().take(rf_chains).collect();
    chosen.sort_unstable();
    let ports = PortSet::from_sorted_unchecked(chosen);

    let w = DVector::from_element(rf_chains, C64::from(1.0 / (rf_chains as f64).sqrt()));
    let sinr = combiner_sinr(model, &ports, &w)?;
    Ok(PortSelection::new(ports, w, sinr, Algorithm::Cuma, None))
}

/// Greedy forward selection. Returns the set in insertion order alongside the
/// per-step SINR.
fn greedy_forward(model: &SignalModel, rf_chains: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut slots = Vec::with_capacity(rf_chains);
    let mut set: Option<PortSet> = None;
    let mut candidates: Vec<usize> = (0..model.ports()).collect();
    let mut trace = Vec::with_capacity(rf_chains);
    for _ in 0..rf_chains {
        let (best, sinr) = argmax(candidates.iter().copied(), |p| {
            let trial = set.as_ref().map_or_else(|| PortSet::single(p), |s| s.with(p));
            subset_sinr(model, &trial)
        })?
        .expect("candidates remain while |S| < L <= P");
        set = Some(set.map_or_else(|| PortSet::single(best), |s| s.with(best)));
        candidates.retain(|&p| p != best);
        slots.push(best);
        trace.push(sinr);
    }
    Ok((slots, trace))
}

pub fn select_gfwd(model: &SignalModel, rf_chains: usize) -> Result<PortSelection> {
    check_chains(model, rf_chains)?;
    let (slots, step_sinr) = greedy_forward(model, rf_chains)?;
    let ports = PortSet::new(slots, model.ports())?;
    let sol = subset_gev(model, &ports)?;
    let trace = SelectionTrace {
        step_sinr,
        ..Default::default()
    };
    Ok(PortSelection::from_gev(ports, sol, Algorithm::Gfwd, Some(trace)))
}

/// Greedy forward selection followed by up to `rounds` swap rounds.
///
/// Each round visits the selected slots in order (greedy insertion order,
/// swapped ports inherit the slot they replace). For a slot holding `p_i` the
/// best replacement over all unselected ports is found; it is applied at once
/// if it beats the incumbent SINR. A round without any accepted swap ends the
/// refinement.
pub fn select_gfwd_swap(model: &SignalModel, rf_chains: usize, rounds: usize) -> Result<PortSelection> {
    check_chains(model, rf_chains)?;
    let (mut slots, step_sinr) = greedy_forward(model, rf_chains)?;
    let mut set = PortSet::new(slots.clone(), model.ports())?;
    let mut best = subset_sinr(model, &set)?;
    let mut swaps = Vec::new();
    let mut executed = 0;

    for round in 1..=rounds {
        executed = round;
        let mut improved = false;
        for slot in slots.iter_mut() {
            let out = *slot;
            let found = argmax((0..model.ports()).filter(|&p| !set.contains(p)), |p| {
                subset_sinr(model, &set.swapped(out, p))
            })?;
            let Some((inp, sinr)) = found else { continue };
            if sinr > best * (1.0 + SWAP_IMPROVEMENT) {
                set = set.swapped(out, inp);
                *slot = inp;
                best = sinr;
                improved = true;
                swaps.push(SwapEvent {
                    round,
                    removed: out,
                    added: inp,
                    sinr,
                });
            }
        }
        if !improved {
            break;
        }
    }

    let sol = subset_gev(model, &set)?;
    let trace = SelectionTrace {
        step_sinr,
        swaps,
        rounds: executed,
    };
    Ok(PortSelection::from_gev(set, sol, Algorithm::GfwdSwap, Some(trace)))
}

/// Backward elimination: starting from every port, repeatedly solve the GEV
/// on the surviving set and drop the port with the smallest combiner weight.
pub fn select_geport(model: &SignalModel, rf_chains: usize) -> Result<PortSelection> {
    check_chains(model, rf_chains)?;
    let mut set = PortSet::all(model.ports());
    while set.len() > rf_chains {
        let sol = subset_gev(model, &set)?;
        let weakest = (0..sol.w.len()).fold(0, |best, i| if sol.w[i].norm() < sol.w[best].norm() { i } else { best });
        let drop = set.indices()[weakest];
        let kept: Vec<usize> = set.indices().iter().copied().filter(|&p| p != drop).collect();
        set = PortSet::from_sorted_unchecked(kept);
    }
    let sol = subset_gev(model, &set)?;
    Ok(PortSelection::from_gev(set, sol, Algorithm::GePort, None))
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Global optimum over all `C(P, L)` subsets, guarded by [`EXHAUSTIVE_BUDGET`].
pub fn select_exhaustive(model: &SignalModel, rf_chains: usize) -> Result<PortSelection> {
    check_chains(model, rf_chains)?;
    let p = model.ports();
    let count = binomial(p, rf_chains);
    if count > EXHAUSTIVE_BUDGET {
        return Err(Error::BudgetExceeded {
            ports: p,
            size: rf_chains,
            count,
            budget: EXHAUSTIVE_BUDGET,
        });
    }

    // Lexicographic enumeration of combinations.
    let mut idx: Vec<usize> = (0..rf_chains).collect();
    let mut best: Option<(PortSet, f64)> = None;
    loop {
        let set = PortSet::from_sorted_unchecked(idx.clone());
        let sinr = subset_sinr(model, &set)?;
        if best.as_ref().is_none_or(|(_, b)| sinr > *b) {
            best = Some((set, sinr));
        }
        let Some(i) = (0..rf_chains).rev().find(|&i| idx[i] < p - rf_chains + i) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..rf_chains {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let (set, _) = best.expect("at least one subset");
    let sol = subset_gev(model, &set)?;
    Ok(PortSelection::from_gev(set, sol, Algorithm::Exhaustive, None))
}
