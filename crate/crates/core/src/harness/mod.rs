//! Coverage experiments: configuration, simulation and reporting.

mod config;
mod coverage;
mod report;

pub use config::{parse_innovation, ExperimentConfig, Truth};
pub use coverage::{resolve_truth, run_coverage_experiment, CoverageCell, CoverageTable};
pub use report::{
    plot_file_name, read_coverage_csv, write_coverage_csv, write_plot_data, write_plot_files,
};

use crate::error::Result;
use crate::oracle::{OracleCache, PreasymptoticOracle};

/// Builds (or loads) the oracle entries a config with oracle truth needs.
pub fn build_oracles(
    config: &ExperimentConfig,
    cache: &OracleCache,
) -> Result<Vec<PreasymptoticOracle>> {
    config.validate()?;
    let keys: Vec<_> = config
        .all_thresholds()
        .into_iter()
        .map(|p| config.oracle_key(p))
        .collect();
    cache.load_or_build(&keys)
}
