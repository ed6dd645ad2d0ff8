//! Stationary bootstrap with geometric block lengths.
//!
//! A draw is a list of blocks `(K_j, L*_j)`: start positions uniform on the
//! series, lengths geometric on `{1, 2, ...}` with mean `r`, the last one
//! truncated so the lengths sum to exactly `n`. Positions past the end are
//! folded back by a [`Wrap`] rule.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::sets::{Membership, OrthantSetPair};

/// How a 0-based position `u >= n` is mapped back into the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Wrap {
    /// 1-based `t > n` is read as `(t mod (n - 1)) + 1`.
    #[default]
    Shifted,
    /// 1-based `t > n` is read as `((t - 1) mod n) + 1`.
    Circular,
}

impl Wrap {
    #[inline]
    pub fn map(self, u: usize, n: usize) -> usize {
        if u < n {
            return u;
        }
        match self {
            Wrap::Shifted => (u + 1) % (n - 1),
            Wrap::Circular => u % n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDraw {
    /// `(start, length)`, 0-based start; lengths sum to `n`.
    pub blocks: Vec<(usize, usize)>,
    pub n: usize,
}

impl BlockDraw {
    pub fn draw<R: Rng + ?Sized>(n: usize, mean_block: f64, rng: &mut R) -> Result<Self> {
        let geom = geometric_lengths(mean_block)?;
        if n < 2 {
            return Err(Error::invalid("stationary bootstrap needs n >= 2"));
        }
        let mut blocks = Vec::new();
        let mut total = 0;
        while total < n {
            let start = rng.random_range(0..n);
            let len = (1 + geom.sample(rng)) as usize;
            let len = len.min(n - total);
            blocks.push((start, len));
            total += len;
        }
        Ok(Self { blocks, n })
    }

    /// A single block covering the series from the start.
    pub fn identity(n: usize) -> Self {
        Self {
            blocks: vec![(0, n)],
            n,
        }
    }

    /// Source position of every resampled position.
    pub fn indices(&self, wrap: Wrap) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        for &(start, len) in &self.blocks {
            out.extend((start..start + len).map(|u| wrap.map(u, self.n)));
        }
        out
    }
}

/// Geometric lengths minus one: `L - 1 ~ Geometric(1/r)` counts failures, so `E L = r`.
pub fn geometric_lengths(mean_block: f64) -> Result<Geometric> {
    if !(mean_block >= 1.0 && mean_block.is_finite()) {
        return Err(Error::invalid(format!(
            "mean block length {mean_block} must be at least 1"
        )));
    }
    Geometric::new(1.0 / mean_block).map_err(|e| Error::invalid(e.to_string()))
}

/// Resampled series of the same length, glued from random blocks of the original.
pub fn stationary_bootstrap_dmc<R: Rng + ?Sized>(
    series: &TimeSeries,
    mean_block: f64,
    wrap: Wrap,
    rng: &mut R,
) -> Result<TimeSeries> {
    let draw = BlockDraw::draw(series.len(), mean_block, rng)?;
    let mut flat = Vec::with_capacity(series.as_flat().len());
    for i in draw.indices(wrap) {
        flat.extend_from_slice(series.observation(i));
    }
    TimeSeries::from_flat(flat, series.dim())
}

/// Extremogram row of a resample given as source indices, with the base
/// threshold kept fixed and `n = len - h_max` summands.
pub fn dmc_row(m: &Membership, indices: &[usize], h_max: usize) -> Vec<Option<f64>> {
    let n = indices.len() - h_max;
    let mut joint = vec![0usize; h_max + 1];
    let mut marginal = 0usize;
    for i in 0..n {
        if m.in_a[indices[i]] {
            marginal += 1;
            for (h, c) in joint.iter_mut().enumerate() {
                *c += usize::from(m.in_b[indices[i + h]]);
            }
        }
    }
    ratios(&joint, marginal)
}

/// Stationary bootstrap of the pairs `(X_t, X_{t+h})`, `t < n`, for every lag
/// at once from one block draw over `n` positions.
pub fn modified_row(
    m: &Membership,
    draw: &BlockDraw,
    h_max: usize,
    wrap: Wrap,
) -> Vec<Option<f64>> {
    let n = draw.n;
    debug_assert!(n + h_max <= m.len());
    let mut joint = vec![0usize; h_max + 1];
    let mut marginal = 0usize;
    for &(start, len) in &draw.blocks {
        for u in start..start + len {
            let t = wrap.map(u, n);
            if m.in_a[t] {
                marginal += 1;
                for (h, c) in joint.iter_mut().enumerate() {
                    *c += usize::from(m.in_b[t + h]);
                }
            }
        }
    }
    ratios(&joint, marginal)
}

pub(crate) fn ratios(joint: &[usize], marginal: usize) -> Vec<Option<f64>> {
    joint
        .iter()
        .map(|&j| (marginal > 0).then(|| j as f64 / marginal as f64))
        .collect()
}

/// One modified stationary bootstrap value at lag `h`; `n = len - h_max`.
#[allow(clippy::too_many_arguments)]
pub fn stationary_bootstrap_modified<R: Rng + ?Sized>(
    series: &TimeSeries,
    a: f64,
    pair: &OrthantSetPair,
    h: usize,
    h_max: usize,
    mean_block: f64,
    wrap: Wrap,
    rng: &mut R,
) -> Result<Option<f64>> {
    if h > h_max {
        return Err(Error::invalid(format!("lag {h} exceeds h_max {h_max}")));
    }
    let n = series.effective_len(h_max)?;
    let m = Membership::compute(series, a, pair)?;
    let draw = BlockDraw::draw(n, mean_block, rng)?;
    Ok(modified_row(&m, &draw, h_max, wrap)[h])
}
