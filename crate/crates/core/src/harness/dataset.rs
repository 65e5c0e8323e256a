//! Labelled dataset export (JSON Lines).
//!
//! One record per line:
//!
//! ```text
//! {"snr_db":..,"H_re":[[..]],"H_im":[[..]],"oracle_ports":[..],
//!  "oracle_sinr":..,"features":[[..]],"seed":..,"trial":..}
//! ```
//!
//! Matrices are nested row-major arrays, port indices are 0-based, and floats
//! use the shortest decimal form that parses back to the identical `f64`.
//! Records assume `N_t = K` and that user 0 is the simulated receiver, so
//! features and labels can be recomputed from `H` and `snr_db` alone.
//!
//! The golden feature file keeps only `H_re`, `H_im`, `snr_db` and `features`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::features::{extract_features, PortFeatures};
use crate::model::{realize, ChannelRealization, CorrelationModel, SignalModel, SystemConfig};
use crate::par::{map_trials, Threads};
use crate::selectors::select_gfwd_swap;
use crate::{Error, Result, C64};

/// SNR grid used when none is given.
pub const DEFAULT_SNRS_DB: [f64; 5] = [5.0, 10.0, 15.0, 20.0, 25.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub snr_db: f64,
    #[serde(rename = "H_re")]
    pub h_re: Vec<Vec<f64>>,
    #[serde(rename = "H_im")]
    pub h_im: Vec<Vec<f64>>,
    pub oracle_ports: Vec<usize>,
    pub oracle_sinr: f64,
    pub features: Vec<Vec<f64>>,
    pub seed: u64,
    pub trial: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenRecord {
    #[serde(rename = "H_re")]
    pub h_re: Vec<Vec<f64>>,
    #[serde(rename = "H_im")]
    pub h_im: Vec<Vec<f64>>,
    pub snr_db: f64,
    pub features: Vec<Vec<f64>>,
}

impl From<&DatasetRecord> for GoldenRecord {
    fn from(r: &DatasetRecord) -> Self {
        GoldenRecord {
            h_re: r.h_re.clone(),
            h_im: r.h_im.clone(),
            snr_db: r.snr_db,
            features: r.features.clone(),
        }
    }
}

fn split_channel(h: &DMatrix<C64>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = h.row_iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
    let im = h.row_iter().map(|r| r.iter().map(|z| z.im).collect()).collect();
    (re, im)
}

/// Rebuilds a `P x N_t` channel from row-major real and imaginary parts.
pub fn join_channel(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<DMatrix<C64>> {
    let rows = re.len();
    let cols = re.first().map_or(0, Vec::len);
    let shape_ok = rows > 0
        && cols > 0
        && im.len() == rows
        && re.iter().chain(im.iter()).all(|r| r.len() == cols);
    if !shape_ok {
        return Err(Error::InvalidArgument("H_re / H_im are empty or ragged".into()));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| C64::new(re[i][j], im[i][j])))
}

impl DatasetRecord {
    pub fn channel(&self) -> Result<ChannelRealization> {
        Ok(ChannelRealization {
            h: join_channel(&self.h_re, &self.h_im)?,
            snr_db: self.snr_db,
            seed: self.seed,
            trial: self.trial,
        })
    }

    /// Signal model of user 0 with `K = N_t`.
    pub fn signal_model(&self) -> Result<SignalModel> {
        let ch = self.channel()?;
        SignalModel::new(&ch, ch.bs_antennas(), 0)
    }

    pub fn recompute_features(&self) -> Result<PortFeatures> {
        let ch = self.channel()?;
        let model = SignalModel::new(&ch, ch.bs_antennas(), 0)?;
        Ok(extract_features(&ch, &model))
    }
}

/// Generates `n` labelled records. Record `i` uses trial `first_trial + i` and
/// SNR `snrs_db[i % snrs_db.len()]`; labels come from GFwd+S with
/// `swap_rounds` rounds.
pub fn export_dataset(
    cfg: &SystemConfig,
    n: u64,
    snrs_db: &[f64],
    swap_rounds: usize,
    first_trial: u64,
    threads: Threads,
) -> Result<Vec<DatasetRecord>> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("dataset size must be at least 1".into()));
    }
    if snrs_db.is_empty() || snrs_db.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("SNR list must be non-empty and finite".into()));
    }
    if cfg.bs_antennas != cfg.users || cfg.user_index != 0 {
        return Err(Error::InvalidConfig(
            "dataset export requires N_t = K and user_index = 0".into(),
        ));
    }
    let corr = CorrelationModel::for_config(cfg)?;
    let records = map_trials(n, threads, |i| {
        let mut point = cfg.clone();
        point.snr_db = snrs_db[(i % snrs_db.len() as u64) as usize];
        let trial = first_trial + i;
        let (ch, model) = realize(&corr, &point, trial)?;
        let label = select_gfwd_swap(&model, cfg.rf_chains, swap_rounds)?;
        let (h_re, h_im) = split_channel(&ch.h);
        Ok(DatasetRecord {
            snr_db: point.snr_db,
            h_re,
            h_im,
            oracle_ports: label.ports.into_vec(),
            oracle_sinr: label.sinr,
            features: extract_features(&ch, &model).rows(),
            seed: cfg.seed,
            trial,
        })
    });
    records.into_iter().collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (i, r) in records.iter().enumerate() {
        serde_json::to_writer(&mut out, r).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SystemConfig {
        SystemConfig {
            ports: 20,
            rf_chains: 3,
            users: 3,
            bs_antennas: 3,
            aperture: 4.0,
            snr_db: 0.0,
            seed: 11,
            user_index: 0,
        }
    }

    #[test]
    fn snr_cycles_through_grid() {
        let recs = export_dataset(&cfg(), 5, &DEFAULT_SNRS_DB, 3, 0, Threads::default()).unwrap();
        let snrs: Vec<f64> = recs.iter().map(|r| r.snr_db).collect();
        assert_eq!(snrs, DEFAULT_SNRS_DB.to_vec());
    }

    #[test]
    fn labels_and_features_are_consistent() {
        let recs = export_dataset(&cfg(), 6, &[5.0, 25.0], 2, 100, Threads::default()).unwrap();
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.trial, 100 + i as u64);
            assert_eq!(r.oracle_ports.len(), 3);
            assert!(r.oracle_ports.windows(2).all(|w| w[0] < w[1]));
            assert!(r.oracle_ports.iter().all(|&p| p < 20));
            assert_eq!(r.features.len(), 20);
            assert_eq!(r.features[0].len(), 9);
            let f = r.recompute_features().unwrap();
            let max_dev = f
                .rows()
                .iter()
                .flatten()
                .zip(r.features.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(max_dev <= 1e-12);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(export_dataset(&cfg(), 0, &DEFAULT_SNRS_DB, 3, 0, Threads::default()).is_err());
        assert!(export_dataset(&cfg(), 1, &[], 3, 0, Threads::default()).is_err());
        let mut c = cfg();
        c.bs_antennas = 5;
        assert!(matches!(
            export_dataset(&c, 1, &DEFAULT_SNRS_DB, 3, 0, Threads::default()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn ragged_channel_is_rejected() {
        assert!(join_channel(&[vec![1.0, 2.0]], &[vec![1.0]]).is_err());
        assert!(join_channel(&[], &[]).is_err());
    }

    #[test]
    fn missing_file_has_path_context() {
        let err = read_jsonl::<DatasetRecord>(Path::new("/nonexistent/data.jsonl")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/data.jsonl"));
    }
}
