//! Per-port input features for a learned port scorer.
//!
//! Row `p` is `[Re(h_p / ||H||_F), Im(h_p / ||H||_F), sinr_p, signal_p,
//! interference_p]`, where the three scalars are divided by their maximum
//! over ports:
//!
//! * `signal_p = A[p,p]`
//! * `interference_p = B[p,p] - 1/snr` (other users only, no noise floor)
//! * `sinr_p = A[p,p] / B[p,p]`
//!
//! A scalar column whose maximum is zero is left as all zeros.

use nalgebra::DMatrix;

use crate::model::{ChannelRealization, SignalModel};

#[derive(Debug, Clone, PartialEq)]
pub struct PortFeatures {
    /// `P x (2 N_t + 3)`.
    pub matrix: DMatrix<f64>,
}

impl PortFeatures {
    pub fn width(bs_antennas: usize) -> usize {
        2 * bs_antennas + 3
    }

    pub fn ports(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let ncols = rows.first()?.len();
        if rows.iter().any(|r| r.len() != ncols) {
            return None;
        }
        Some(PortFeatures {
            matrix: DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]),
        })
    }
}

pub fn extract_features(ch: &ChannelRealization, model: &SignalModel) -> PortFeatures {
    let (p, nt) = (ch.ports(), ch.bs_antennas());
    let fro = ch.h.norm();
    let inv = if fro > 0.0 { 1.0 / fro } else { 0.0 };
    let noise = 1.0 / model.snr_linear;

    let signal: Vec<f64> = (0..p).map(|i| model.a[(i, i)].re).collect();
    let interference: Vec<f64> = (0..p).map(|i| (model.b[(i, i)].re - noise).max(0.0)).collect();
    let sinr: Vec<f64> = (0..p).map(|i| model.port_sinr(i)).collect();
    let scalars = [normalized(&sinr), normalized(&signal), normalized(&interference)];

    let mut m = DMatrix::zeros(p, PortFeatures::width(nt));
    for i in 0..p {
        for j in 0..nt {
            m[(i, j)] = ch.h[(i, j)].re * inv;
            m[(i, nt + j)] = ch.h[(i, j)].im * inv;
        }
        for (c, col) in scalars.iter().enumerate() {
            m[(i, 2 * nt + c)] = col[i];
        }
    }
    PortFeatures { matrix: m }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let max = v.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        v.iter().map(|x| x / max).collect()
    } else {
        vec![0.0; v.len()]
    }
}
