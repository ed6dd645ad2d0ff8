//! Multiplier block bootstrap for the extremogram.
//!
//! Blocks `j = 0..m` cover observations `j·r .. (j+1)·r` of the first `m·r`
//! positions. Each block's marginal and joint exceedance counts are weighted
//! by `1 + ξ_j`:
//!
//! ```text
//! ρ̂*(h) = Σ_j (1+ξ_j) J_j(h) / Σ_j (1+ξ_j) M_j
//! ```
//!
//! Weighted counts may be negative; replicate values are not clipped.

use crate::blocks::BlockScheme;
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::sets::{Membership, OrthantSetPair};

/// Per-block exceedance counts, the sufficient statistic for multiplier replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCounts {
    scheme: BlockScheme,
    marginal: Vec<f64>,
    /// `joint[j * (h_max + 1) + h]`.
    joint: Vec<f64>,
    h_max: usize,
}

impl BlockCounts {
    pub fn new(m: &Membership, n: usize, h_max: usize, block_length: usize) -> Result<Self> {
        if n + h_max > m.len() {
            return Err(Error::invalid("membership shorter than n + h_max"));
        }
        let scheme = BlockScheme::new(n, block_length)?;
        let width = h_max + 1;
        let mut marginal = vec![0.0; scheme.block_count()];
        let mut joint = vec![0.0; scheme.block_count() * width];
        for (j, range) in scheme.blocks().enumerate() {
            for i in range {
                if m.in_a[i] {
                    marginal[j] += 1.0;
                    let row = &mut joint[j * width..(j + 1) * width];
                    for (h, c) in row.iter_mut().enumerate() {
                        if m.in_b[i + h] {
                            *c += 1.0;
                        }
                    }
                }
            }
        }
        Ok(Self {
            scheme,
            marginal,
            joint,
            h_max,
        })
    }

    pub fn scheme(&self) -> &BlockScheme {
        &self.scheme
    }

    pub fn block_count(&self) -> usize {
        self.scheme.block_count()
    }

    /// One replicate row `ρ̂*(0..=h_max)`.
    pub fn replicate(&self, xi: &[f64]) -> Result<Vec<Option<f64>>> {
        if xi.len() != self.block_count() {
            return Err(Error::invalid(format!(
                "{} multipliers for {} blocks",
                xi.len(),
                self.block_count()
            )));
        }
        let width = self.h_max + 1;
        let mut num = vec![0.0; width];
        let mut den = 0.0;
        for (j, w) in xi.iter().map(|x| 1.0 + x).enumerate() {
            if self.marginal[j] == 0.0 {
                continue;
            }
            den += w * self.marginal[j];
            for (acc, c) in num.iter_mut().zip(&self.joint[j * width..(j + 1) * width]) {
                *acc += w * c;
            }
        }
        Ok(num
            .into_iter()
            .map(|v| (den != 0.0).then(|| v / den))
            .collect())
    }
}

/// `ρ̂*(h)` for `h = 0..=h_max` given block multipliers `xi`, with `n = len - h_max`.
pub fn multiplier_bootstrap_extremogram(
    series: &TimeSeries,
    a: f64,
    pair: &OrthantSetPair,
    h_max: usize,
    block_length: usize,
    xi: &[f64],
) -> Result<Vec<Option<f64>>> {
    let n = series.effective_len(h_max)?;
    let m = Membership::compute(series, a, pair)?;
    BlockCounts::new(&m, n, h_max, block_length)?.replicate(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremogram::empirical_extremogram;

    fn tail() -> OrthantSetPair {
        OrthantSetPair::tail(1)
    }

    #[test]
    fn zero_multipliers_reproduce_block_restricted_estimate() {
        let x =
            TimeSeries::new(vec![2.0, 3.0, 0.5, 2.5, 2.6, 1.1, 0.2, 4.0, 1.5, 0.3, 2.2]).unwrap();
        // n = 10, r = 3: blocks cover the first 9 positions
        let rep = multiplier_bootstrap_extremogram(&x, 1.0, &tail(), 1, 3, &[0.0; 3]).unwrap();
        let restricted = TimeSeries::new(x.as_flat()[..10].to_vec()).unwrap();
        let base = empirical_extremogram(&restricted, 1.0, &tail(), 1).unwrap();
        assert_eq!(rep, base.values);
    }

    #[test]
    fn single_block_weight_cancels() {
        let x = TimeSeries::new(vec![2.0, 3.0, 0.5, 2.5, 2.6]).unwrap();
        let base = empirical_extremogram(&x, 1.0, &tail(), 1).unwrap();
        for xi in [0.7, -0.3, 4.0] {
            let rep = multiplier_bootstrap_extremogram(&x, 1.0, &tail(), 1, 4, &[xi]).unwrap();
            for (r, b) in rep.iter().zip(&base.values) {
                assert!((r.unwrap() - b.unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_block_arithmetic() {
        // block 0: exceedances at 0 and 1, joint at lag 1 only from 0 -> (1, 2)
        // block 1: exceedance at 3 with a joint at lag 1 -> (1, 1)
        let x = TimeSeries::new(vec![2.0, 2.0, 0.0, 2.0, 2.0, 0.0]).unwrap();
        let n = 4;
        let m = Membership::compute(&x, 1.0, &tail()).unwrap();
        let counts = BlockCounts::new(&m, n, 1, 2).unwrap();
        assert_eq!(counts.marginal, vec![2.0, 1.0]);
        let rep = counts.replicate(&[1.0, -0.5]).unwrap();
        assert!((rep[1].unwrap() - 2.5 / 4.5).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_and_undefined() {
        let x = TimeSeries::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(multiplier_bootstrap_extremogram(&x, 1.0, &tail(), 0, 2, &[0.0]).is_err());
        let rep = multiplier_bootstrap_extremogram(&x, 1.0, &tail(), 0, 2, &[0.0, 0.0]).unwrap();
        assert_eq!(rep, vec![None]);
    }
}
