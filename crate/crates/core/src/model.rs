//! Scenario configuration, spatial correlation, channel sampling and the
//! per-user signal / interference-plus-noise matrices.
//!
//! Port `p` (0-based) of a linear fluid antenna spanning `W` wavelengths sits
//! at the normalised position `d_p = p * W / (P - 1)`. Ports are correlated
//! through the isotropic-scattering kernel
//!
//! ```text
//! Sigma[p, q] = sinc(2 (d_p - d_q)),   sinc(x) = sin(pi x) / (pi x)
//! ```
//!
//! i.e. the normalised sinc, which equals `sin(2 pi d) / (2 pi d)` at a
//! wavelength-normalised spacing `d`. Every channel column is an independent
//! `CN(0, Sigma)` draw.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Scenario parameters. Serialised with the short keys `P`, `L`, `K`, `N_t`,
/// `W`, `snr_db`, `seed`, `user_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawConfig")]
pub struct SystemConfig {
    #[serde(rename = "P")]
    pub ports: usize,
    #[serde(rename = "L")]
    pub rf_chains: usize,
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "N_t")]
    pub bs_antennas: usize,
    /// Aperture in wavelengths.
    #[serde(rename = "W")]
    pub aperture: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub user_index: usize,
}

/// On-disk form: every key is optional and `N_t` falls back to `K`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "P")]
    ports: Option<usize>,
    #[serde(rename = "L")]
    rf_chains: Option<usize>,
    #[serde(rename = "K")]
    users: Option<usize>,
    #[serde(rename = "N_t")]
    bs_antennas: Option<usize>,
    #[serde(rename = "W")]
    aperture: Option<f64>,
    snr_db: Option<f64>,
    seed: Option<u64>,
    user_index: Option<usize>,
}

impl From<RawConfig> for SystemConfig {
    fn from(raw: RawConfig) -> Self {
        let d = SystemConfig::default();
        let users = raw.users.unwrap_or(d.users);
        SystemConfig {
            ports: raw.ports.unwrap_or(d.ports),
            rf_chains: raw.rf_chains.unwrap_or(d.rf_chains),
            users,
            bs_antennas: raw.bs_antennas.unwrap_or(users),
            aperture: raw.aperture.unwrap_or(d.aperture),
            snr_db: raw.snr_db.unwrap_or(d.snr_db),
            seed: raw.seed.unwrap_or(d.seed),
            user_index: raw.user_index.unwrap_or(d.user_index),
        }
    }
}

impl Default for SystemConfig {
    /// P = 100, L = 8, K = N_t = 10, W = 4, 15 dB.
    fn default() -> Self {
        SystemConfig {
            ports: 100,
            rf_chains: 8,
            users: 10,
            bs_antennas: 10,
            aperture: 4.0,
            snr_db: 15.0,
            seed: 0,
            user_index: 0,
        }
    }
}

impl SystemConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: SystemConfig = serde_json::from_str(s)
            .map_err(|e| Error::InvalidConfig(format!("config json: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn snr_linear(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    /// Sets `K` and keeps `N_t = K`.
    pub fn with_users(mut self, users: usize) -> Self {
        self.users = users;
        self.bs_antennas = users;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.ports < 2 {
            return bad(format!("P must be at least 2, got {}", self.ports));
        }
        if self.rf_chains == 0 || self.rf_chains > self.ports {
            return bad(format!("L must lie in [1, P = {}], got {}", self.ports, self.rf_chains));
        }
        if self.users == 0 {
            return bad("K must be at least 1".into());
        }
        if self.bs_antennas < self.users {
            return bad(format!("N_t = {} is smaller than K = {}", self.bs_antennas, self.users));
        }
        if self.user_index >= self.users {
            return bad(format!("user_index {} out of range for K = {}", self.user_index, self.users));
        }
        if !(self.aperture.is_finite() && self.aperture > 0.0) {
            return bad(format!("W must be positive, got {}", self.aperture));
        }
        if !self.snr_db.is_finite() {
            return bad(format!("snr_db must be finite, got {}", self.snr_db));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Normalised sinc, `sin(pi x) / (pi x)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Port correlation matrix together with a PSD square-root factor.
#[derive(Debug, Clone)]
pub struct CorrelationModel {
    pub ports: usize,
    pub aperture: f64,
    pub positions: Vec<f64>,
    pub sigma: DMatrix<f64>,
    /// `F` with `F F^T = Sigma` after clamping negative eigenvalues to zero.
    pub factor: DMatrix<f64>,
}

impl CorrelationModel {
    pub fn new(ports: usize, aperture: f64) -> Result<Self> {
        if ports < 2 {
            return Err(Error::InvalidConfig(format!("P must be at least 2, got {ports}")));
        }
        if !(aperture.is_finite() && aperture > 0.0) {
            return Err(Error::InvalidConfig(format!("W must be positive, got {aperture}")));
        }
        let positions: Vec<f64> = (0..ports)
            .map(|p| p as f64 * aperture / (ports - 1) as f64)
            .collect();
        let sigma = DMatrix::from_fn(ports, ports, |p, q| {
            if p == q {
                1.0
            } else {
                sinc(2.0 * (positions[p] - positions[q]))
            }
        });

        let eig = SymmetricEigen::new(sigma.clone());
        let mut factor = eig.eigenvectors;
        for (mut col, &lambda) in factor.column_iter_mut().zip(eig.eigenvalues.iter()) {
            col *= lambda.max(0.0).sqrt();
        }

        Ok(CorrelationModel {
            ports,
            aperture,
            positions,
            sigma,
            factor,
        })
    }

    pub fn for_config(cfg: &SystemConfig) -> Result<Self> {
        Self::new(cfg.ports, cfg.aperture)
    }
}

/// Per-trial PRNG: a ChaCha12 generator keyed by the master seed, with the
/// trial index selecting the stream. Trials are therefore independent of the
/// order in which they are evaluated.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One user's `P x N_t` channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: DMatrix<C64>,
    pub snr_db: f64,
    pub seed: u64,
    pub trial: u64,
}

impl ChannelRealization {
    /// Draws `H = F G` where `G` has i.i.d. `CN(0, 1)` entries. `G` is filled
    /// column by column, real part before imaginary part.
    pub fn sample(corr: &CorrelationModel, cfg: &SystemConfig, trial: u64) -> Result<Self> {
        if corr.ports != cfg.ports {
            return Err(Error::InvalidConfig(format!(
                "correlation model has {} ports, config has {}",
                corr.ports, cfg.ports
            )));
        }
        let (p, nt) = (cfg.ports, cfg.bs_antennas);
        let mut rng = trial_rng(cfg.seed, trial);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let mut g_re = DMatrix::<f64>::zeros(p, nt);
        let mut g_im = DMatrix::<f64>::zeros(p, nt);
        for j in 0..nt {
            for i in 0..p {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                g_re[(i, j)] = scale * re;
                g_im[(i, j)] = scale * im;
            }
        }
        let h_re = &corr.factor * g_re;
        let h_im = &corr.factor * g_im;
        let h = DMatrix::from_fn(p, nt, |i, j| C64::new(h_re[(i, j)], h_im[(i, j)]));
        Ok(ChannelRealization {
            h,
            snr_db: cfg.snr_db,
            seed: cfg.seed,
            trial,
        })
    }

    pub fn ports(&self) -> usize {
        self.h.nrows()
    }

    pub fn bs_antennas(&self) -> usize {
        self.h.ncols()
    }

    /// SINR of `user_index` when the ports `ports` are combined with `w`,
    /// evaluated term by term from the channel columns: desired power
    /// `|w^H h_k|^2` over `sum_{j != k} |w^H h_j|^2 + ||w||^2 / snr`.
    pub fn combiner_sinr(&self, users: usize, user_index: usize, ports: &[usize], w: &DVector<C64>) -> Result<f64> {
        if ports.len() != w.len() || ports.iter().any(|&p| p >= self.ports()) {
            return Err(Error::InvalidArgument("combiner does not match the port set".into()));
        }
        if users > self.bs_antennas() || user_index >= users {
            return Err(Error::InvalidConfig(format!("user {user_index} of K = {users} out of range")));
        }
        let project = |j: usize| -> f64 {
            ports
                .iter()
                .zip(w.iter())
                .map(|(&p, wi)| wi.conj() * self.h[(p, j)])
                .sum::<C64>()
                .norm_sqr()
        };
        let interference: f64 = (0..users).filter(|&j| j != user_index).map(project).sum();
        let noise = w.norm_squared() / db_to_linear(self.snr_db);
        Ok(project(user_index) / (interference + noise))
    }
}

/// Desired-signal vector and the matrix pair `(A, B)` of one user, with
/// canonical precoding `p_j = e_j`.
#[derive(Debug, Clone)]
pub struct SignalModel {
    /// Column `k` of `H`.
    pub g: DVector<C64>,
    /// `g g^H`.
    pub a: DMatrix<C64>,
    /// Interference from the other users' columns plus `I / snr`.
    pub b: DMatrix<C64>,
    pub snr_linear: f64,
}

impl SignalModel {
    /// Interference is summed over the `K - 1` other users' columns `j < K`.
    pub fn new(ch: &ChannelRealization, users: usize, user_index: usize) -> Result<Self> {
        let (p, nt) = (ch.ports(), ch.bs_antennas());
        if users == 0 || users > nt || user_index >= users {
            return Err(Error::InvalidConfig(format!(
                "user {user_index} of K = {users} does not fit a channel with {nt} columns"
            )));
        }
        let snr_linear = db_to_linear(ch.snr_db);
        let g: DVector<C64> = ch.h.column(user_index).into_owned();
        let a = hermitian_part(&(&g * g.adjoint()));

        let mut b = DMatrix::<C64>::identity(p, p) * C64::from(1.0 / snr_linear);
        for j in (0..users).filter(|&j| j != user_index) {
            let hj = ch.h.column(j);
            b += hj * hj.adjoint();
        }
        let b = hermitian_part(&b);

        Ok(SignalModel {
            g,
            a,
            b,
            snr_linear,
        })
    }

    pub fn from_config(ch: &ChannelRealization, cfg: &SystemConfig) -> Result<Self> {
        Self::new(ch, cfg.users, cfg.user_index)
    }

    pub fn ports(&self) -> usize {
        self.g.len()
    }

    /// Single-port SINR `A[p,p] / B[p,p]`.
    pub fn port_sinr(&self, p: usize) -> f64 {
        self.a[(p, p)].re / self.b[(p, p)].re
    }
}

/// `(M + M^H) / 2`, which has an exactly real diagonal.
fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Samples one trial and assembles its signal model.
pub fn realize(
    corr: &CorrelationModel,
    cfg: &SystemConfig,
    trial: u64,
) -> Result<(ChannelRealization, SignalModel)> {
    let ch = ChannelRealization::sample(corr, cfg, trial)?;
    let model = SignalModel::from_config(&ch, cfg)?;
    Ok((ch, model))
}
