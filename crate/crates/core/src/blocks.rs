use std::ops::Range;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Partition of `n` observations into `m = n / r` disjoint blocks of length `r`.
/// Observations past `m * r` belong to no block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockScheme {
    n: usize,
    block_length: usize,
    block_count: usize,
}

impl BlockScheme {
    pub fn new(n: usize, block_length: usize) -> Result<Self> {
        if block_length == 0 || block_length > n {
            return Err(Error::invalid(format!(
                "block length {block_length} outside 1..={n}"
            )));
        }
        Ok(Self {
            n,
            block_length,
            block_count: n / block_length,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// Number of observations covered by blocks, `m * r`.
    pub fn covered(&self) -> usize {
        self.block_count * self.block_length
    }

    pub fn block(&self, j: usize) -> Range<usize> {
        debug_assert!(j < self.block_count);
        j * self.block_length..(j + 1) * self.block_length
    }

    pub fn blocks(&self) -> impl ExactSizeIterator<Item = Range<usize>> + '_ {
        (0..self.block_count).map(|j| self.block(j))
    }

    /// Trailing indices not assigned to any block (possibly empty).
    pub fn excluded(&self) -> Range<usize> {
        self.covered()..self.n
    }
}

/// Blocks over the whole series.
pub fn partition_blocks(series: &TimeSeries, block_length: usize) -> Result<BlockScheme> {
    BlockScheme::new(series.len(), block_length)
}
