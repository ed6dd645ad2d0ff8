//! Extremogram estimation for stationary time series with multiplier block
//! bootstrap and stationary bootstrap confidence intervals, plus the Monte
//! Carlo machinery to measure their coverage.

pub mod blocks;
pub mod bootstrap;
pub mod cluster;
pub mod error;
pub mod extremogram;
pub mod harness;
pub mod models;
pub mod oracle;
pub mod rng;
pub mod series;
pub mod sets;
pub mod threshold;

pub use blocks::{partition_blocks, BlockScheme};
pub use error::{Error, Result};
pub use extremogram::{
    empirical_extremogram, empirical_extremogram_estimated, linear_process_extremogram,
    ExtremogramEstimate,
};
pub use models::{InnovationDist, ModelSpec, MultiplierDist};
pub use series::TimeSeries;
pub use sets::{estimate_vn, exceedance_indicators, OrthantSetPair};
pub use threshold::{estimate_threshold, ThresholdSpec};
