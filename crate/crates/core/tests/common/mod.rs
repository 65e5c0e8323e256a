#![allow(dead_code)]

//! Test-only oracles. None of these go through the crate's Cholesky or
//! eigen-solver paths.

use famasel::model::{realize, CorrelationModel, SystemConfig};
use famasel::{ChannelRealization, SignalModel, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn config(ports: usize, rf_chains: usize, users: usize, snr_db: f64, seed: u64) -> SystemConfig {
    SystemConfig {
        ports,
        rf_chains,
        users,
        bs_antennas: users,
        aperture: 4.0,
        snr_db,
        seed,
        user_index: 0,
    }
}

pub fn instance(cfg: &SystemConfig, trial: u64) -> (ChannelRealization, SignalModel) {
    let corr = CorrelationModel::for_config(cfg).unwrap();
    realize(&corr, cfg, trial).unwrap()
}

pub fn cn<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| cn(rng))
}

/// PSD `A` of rank `min(n, rank)` and PD `B = Y Y^H + 0.1 I`.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize, rank: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let x = DMatrix::from_fn(n, rank, |_, _| cn(rng));
    let y = DMatrix::from_fn(n, n, |_, _| cn(rng));
    (&x * x.adjoint(), &y * y.adjoint() + DMatrix::identity(n, n) * C64::from(0.1))
}

/// Per-user SINR evaluated literally from the channel columns:
/// `|w^H h_k,S|^2 / (sum_{j != k} |w^H h_j,S|^2 + 1/snr)` with `w` normalised.
pub fn literal_sinr(ch: &ChannelRealization, users: usize, k: usize, ports: &[usize], w: &DVector<C64>) -> f64 {
    let norm = w.norm();
    let snr = 10f64.powf(ch.snr_db / 10.0);
    let proj = |j: usize| {
        let mut acc = C64::new(0.0, 0.0);
        for (i, &p) in ports.iter().enumerate() {
            acc += (w[i] / norm).conj() * ch.h[(p, j)];
        }
        acc.norm_sqr()
    };
    let mut den = 1.0 / snr;
    for j in 0..users {
        if j != k {
            den += proj(j);
        }
    }
    proj(k) / den
}

/// Generalized Rayleigh quotient `w^H A w / w^H B w`.
pub fn rayleigh(a: &DMatrix<C64>, b: &DMatrix<C64>, w: &DVector<C64>) -> f64 {
    w.dotc(&(a * w)).re / w.dotc(&(b * w)).re
}

/// `B^{-1} A` by Gauss-Jordan elimination with partial pivoting.
fn solve_many(b: &DMatrix<C64>, a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = b.nrows();
    let m = a.ncols();
    let mut aug: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| b[(i, j)]).chain((0..m).map(|j| a[(i, j)])).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| aug[x][col].norm().total_cmp(&aug[y][col].norm())).unwrap();
        aug.swap(col, piv);
        let d = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != C64::new(0.0, 0.0) {
                    let pivot_row = aug[col].clone();
                    for (v, pv) in aug[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    DMatrix::from_fn(n, m, |i, j| aug[i][n + j])
}

/// Dominant generalized eigenvalue by power iteration on `B^{-1} A`.
pub fn power_gev(a: &DMatrix<C64>, b: &DMatrix<C64>, iters: usize) -> (f64, DVector<C64>) {
    let n = a.nrows();
    let m = solve_many(b, a);
    let mut x = DVector::from_fn(n, |i, _| C64::new(1.0 + i as f64 * 0.37, 0.5 - i as f64 * 0.11));
    for _ in 0..iters {
        let y = &m * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return (0.0, x);
        }
        x = y / C64::from(norm);
    }
    (rayleigh(a, b, &x), x)
}

/// Best Rayleigh quotient found by `samples` random unit vectors followed by
/// `refine` steps of shrinking random-perturbation hill climbing.
pub fn random_search_gev<R: Rng>(a: &DMatrix<C64>, b: &DMatrix<C64>, samples: usize, refine: usize, rng: &mut R) -> (f64, f64) {
    let n = a.nrows();
    let mut best_w = random_vector(rng, n);
    let mut best = rayleigh(a, b, &best_w);
    for _ in 1..samples {
        let w = random_vector(rng, n);
        let q = rayleigh(a, b, &w);
        if q > best {
            best = q;
            best_w = w;
        }
    }
    let pure = best;
    let mut step = 0.5;
    for i in 0..refine {
        let w = &best_w / C64::from(best_w.norm()) + random_vector(rng, n) * C64::from(step);
        let q = rayleigh(a, b, &w);
        if q > best {
            best = q;
            best_w = w;
        }
        if i % 200 == 199 {
            step *= 0.7;
        }
    }
    (pure, best)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
