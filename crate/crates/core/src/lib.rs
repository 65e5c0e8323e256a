//! Port selection for slow-FAMA receivers with multi-port fluid antennas.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] builds the spatially correlated channel and the per-user
//!   signal / interference-plus-noise matrices.
//! * [`gev`] evaluates the dominant generalized eigenpair of a restricted
//!   matrix pair, which is the SINR-optimal combiner for a fixed port set.
//! * [`selectors`] holds every port-selection algorithm (greedy forward with
//!   swap refinement, the baselines and the exhaustive oracle).
//! * [`harness`] runs Monte Carlo sweeps, timing benchmarks, the invariant
//!   suite, and exports labelled datasets.
//! * [`cli`] binds all of the above to the `famasel` binary.
//!
//! Trial-level parallelism lives in [`par`]; it is backed by rayon when the
//! `parallel` feature is enabled (the default) and is sequential otherwise.

pub mod cli;
pub mod error;
pub mod gev;
pub mod harness;
pub mod model;
pub mod par;
pub mod selectors;

pub use error::{Error, Result};
pub use gev::{GevSolution, PortSet};
pub use model::{ChannelRealization, CorrelationModel, SignalModel, SystemConfig};
pub use selectors::{Algorithm, PortSelection};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;

#[cfg(test)]
pub(crate) mod testutil;
