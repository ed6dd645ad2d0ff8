//! Bootstrap replicates of the extremogram and the intervals built from them.

mod intervals;
mod multiplier;
mod stationary;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extremogram::{empirical_extremogram, ExtremogramEstimate};
use crate::models::{sample_multipliers, MultiplierDist};
use crate::rng::{label, stream};
use crate::series::TimeSeries;
use crate::sets::{Membership, OrthantSetPair};

pub use intervals::{
    bootstrap_quantiles, ci_direct, ci_transfer, simultaneous_band, BootstrapQuantiles, CiMethod,
    ConfidenceInterval, SimultaneousBand,
};
pub use multiplier::{multiplier_bootstrap_extremogram, BlockCounts};
pub use stationary::{
    dmc_row, geometric_lengths, modified_row, stationary_bootstrap_dmc,
    stationary_bootstrap_modified, BlockDraw, Wrap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Multiplier,
    StationaryDmc,
    StationaryModified,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::Multiplier,
        Scheme::StationaryDmc,
        Scheme::StationaryModified,
    ];

    pub(crate) fn stream_label(self) -> u64 {
        match self {
            Scheme::Multiplier => label::MULTIPLIER,
            Scheme::StationaryDmc => label::STATIONARY_DMC,
            Scheme::StationaryModified => label::STATIONARY_MODIFIED,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Multiplier => "multiplier",
            Scheme::StationaryDmc => "dmc",
            Scheme::StationaryModified => "modified",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "multiplier" => Ok(Scheme::Multiplier),
            "dmc" | "stationary_dmc" => Ok(Scheme::StationaryDmc),
            "modified" | "stationary_modified" => Ok(Scheme::StationaryModified),
            other => Err(Error::invalid(format!(
                "unknown scheme `{other}` (expected multiplier, dmc or modified)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub scheme: Scheme,
    pub replicates: usize,
    /// Block length `r_n` (multiplier) or mean block length (stationary).
    pub block_length: usize,
    pub multiplier: MultiplierDist,
    pub wrap: Wrap,
}

impl BootstrapConfig {
    pub fn new(scheme: Scheme, replicates: usize, block_length: usize) -> Self {
        Self {
            scheme,
            replicates,
            block_length,
            multiplier: MultiplierDist::default(),
            wrap: Wrap::Shifted,
        }
    }
}

/// Replicate generator for one series and one threshold. Holds the
/// precomputed exceedance structure so each replicate costs only the
/// resampling itself.
#[derive(Debug, Clone)]
pub struct Resampler {
    config: BootstrapConfig,
    membership: Membership,
    counts: Option<BlockCounts>,
    n: usize,
    total: usize,
    h_max: usize,
}

impl Resampler {
    pub fn new(
        membership: Membership,
        n: usize,
        h_max: usize,
        config: BootstrapConfig,
    ) -> Result<Self> {
        let total = membership.len();
        if n + h_max > total || n < 2 {
            return Err(Error::invalid(format!(
                "need 2 <= n and n + h_max <= {total}, got n = {n}, h_max = {h_max}"
            )));
        }
        let counts = match config.scheme {
            Scheme::Multiplier => Some(BlockCounts::new(
                &membership,
                n,
                h_max,
                config.block_length,
            )?),
            _ => {
                geometric_lengths(config.block_length as f64)?;
                None
            }
        };
        if config.scheme == Scheme::Multiplier {
            config.multiplier.sampler()?;
        }
        Ok(Self {
            config,
            membership,
            counts,
            n,
            total,
            h_max,
        })
    }

    pub fn config(&self) -> &BootstrapConfig {
        &self.config
    }

    /// Replicate row `0..=h_max` drawn from `rng`.
    pub fn replicate<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Option<f64>>> {
        let r = self.config.block_length as f64;
        match self.config.scheme {
            Scheme::Multiplier => {
                let counts = self.counts.as_ref().expect("multiplier counts");
                let xi = sample_multipliers(self.config.multiplier, counts.block_count(), rng)?;
                counts.replicate(&xi)
            }
            Scheme::StationaryDmc => {
                let draw = BlockDraw::draw(self.total, r, rng)?;
                Ok(dmc_row(
                    &self.membership,
                    &draw.indices(self.config.wrap),
                    self.h_max,
                ))
            }
            Scheme::StationaryModified => {
                let draw = BlockDraw::draw(self.n, r, rng)?;
                Ok(modified_row(
                    &self.membership,
                    &draw,
                    self.h_max,
                    self.config.wrap,
                ))
            }
        }
    }
}

/// `B × (h_max + 1)` replicate matrix with its base estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapReplicates {
    pub values: Vec<Vec<Option<f64>>>,
    pub scheme: Scheme,
    pub base: ExtremogramEstimate,
    pub seed: u64,
}

impl BootstrapReplicates {
    pub fn replicates(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, h: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|row| row[h]).collect()
    }

    pub fn quantiles(&self, h: usize, alpha: f64) -> Result<BootstrapQuantiles> {
        bootstrap_quantiles(&self.column(h), alpha)
    }

    pub fn band(&self, alpha: f64) -> Result<SimultaneousBand> {
        simultaneous_band(&self.values, &self.base.values, alpha)
    }

    /// Rows are replicates, columns lags `0..=h_max`, undefined cells `NA`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..self.values.first().map_or(0, Vec::len))
            .map(|h| format!("h{h}"))
            .collect();
        w.write_record(&header)?;
        for row in &self.values {
            w.write_record(row.iter().map(|v| match v {
                Some(v) => v.to_string(),
                None => "NA".to_string(),
            }))?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Draws `config.replicates` rows at threshold `a`. Replicate `b` uses its own
/// stream `(seed, [BOOTSTRAP, scheme, b])`, so the matrix does not depend on
/// the number of worker threads.
pub fn bootstrap_replicates(
    series: &TimeSeries,
    a: f64,
    pair: &OrthantSetPair,
    h_max: usize,
    config: BootstrapConfig,
    seed: u64,
) -> Result<BootstrapReplicates> {
    if config.replicates == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let base = empirical_extremogram(series, a, pair, h_max)?;
    let membership = Membership::compute(series, a, pair)?;
    let sampler = Resampler::new(membership, base.n, h_max, config)?;
    let values = (0..config.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(
                seed,
                &[label::BOOTSTRAP, config.scheme.stream_label(), b as u64],
            );
            sampler.replicate(&mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BootstrapReplicates {
        values,
        scheme: config.scheme,
        base,
        seed,
    })
}
