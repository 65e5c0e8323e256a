//! Monte Carlo sweeps, timing, invariant suites and dataset export.

pub mod bench;
pub mod dataset;
pub mod features;
pub mod sweep;
pub mod verify;

pub use bench::{bench_timing, TimingRow};
pub use dataset::{export_dataset, DatasetRecord, GoldenRecord};
pub use features::{extract_features, PortFeatures};
pub use sweep::{run_sweep, SweepRecord, SweepSpec, SweptParameter};
