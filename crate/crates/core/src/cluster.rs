//! Empirical process of cluster functionals and its multiplier analogues.
//!
//! A block is a contiguous run of standardized observations; sub-threshold
//! observations are replaced by the zero element. For a functional `f` and
//! blocks `Y_1..Y_m`,
//!
//! ```text
//! Z_n(f)      = (n v_n)^{-1/2} Σ_j        (f(Y_j) - c_j)
//! Z_{n,ξ}(f)  = (n v_n)^{-1/2} Σ_j ξ_j    (f(Y_j) - c_j)
//! Z*_{n,ξ}(f) = (n v_n)^{-1/2} Σ_j ξ_j    (f(Y_j) - mean_j f(Y_j))
//! ```
//!
//! where `c_j` is a caller-supplied centering.

use crate::blocks::BlockScheme;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Series after division by `a` with sub-threshold observations zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSeries {
    values: Vec<f64>,
    dim: usize,
}

impl StandardizedSeries {
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn block(&self, range: std::ops::Range<usize>) -> Block<'_> {
        Block {
            data: &self.values[range.start * self.dim..range.end * self.dim],
            dim: self.dim,
        }
    }
}

/// Borrowed view of consecutive standardized observations.
#[derive(Debug, Clone, Copy)]
pub struct Block<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Block<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim));
        Self { data, dim }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn observations(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        self.data.chunks_exact(self.dim)
    }
}

/// `X_i/a` if `X_i/a ∉ (-∞, x*)^d`, the zero element otherwise.
pub fn standardize(series: &TimeSeries, a: f64, x_star: f64) -> Result<StandardizedSeries> {
    crate::sets::check_threshold(a)?;
    if x_star.is_nan() || x_star <= 0.0 {
        return Err(Error::invalid("x_star must be positive"));
    }
    let dim = series.dim();
    let mut values = Vec::with_capacity(series.as_flat().len());
    for x in series.observations() {
        let keep = x.iter().any(|v| v / a >= x_star);
        if keep {
            values.extend(x.iter().map(|v| v / a));
        } else {
            values.extend(std::iter::repeat_n(0.0, dim));
        }
    }
    Ok(StandardizedSeries { values, dim })
}

/// A functional of a block that vanishes on all-zero blocks and ignores
/// leading or trailing zeros.
pub trait ClusterFunctional {
    fn evaluate(&self, block: Block<'_>) -> f64;
}

impl<F> ClusterFunctional for F
where
    F: Fn(Block<'_>) -> f64,
{
    fn evaluate(&self, block: Block<'_>) -> f64 {
        self(block)
    }
}

/// Generalized tail array sum `f_φ(y_1..y_r) = Σ_i φ(y_i)`, `φ(0) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct TailArraySum<P>(pub P);

impl<P> ClusterFunctional for TailArraySum<P>
where
    P: Fn(&[f64]) -> f64,
{
    fn evaluate(&self, block: Block<'_>) -> f64 {
        block.observations().map(|y| (self.0)(y)).sum()
    }
}

/// Largest max-norm within the block.
#[derive(Debug, Clone, Copy, Default)]
pub struct BlockMax;

impl ClusterFunctional for BlockMax {
    fn evaluate(&self, block: Block<'_>) -> f64 {
        block
            .observations()
            .flat_map(|y| y.iter())
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

/// Block-wise `c_j` subtracted from `f(Y_j)`.
#[derive(Debug, Clone, Copy)]
pub enum Centering<'a> {
    /// Known `E f(Y_j)`, identical for every block.
    Constant(f64),
    /// Known `E f(Y_j)` per block.
    PerBlock(&'a [f64]),
    /// Empirical mean `m^{-1} Σ_j f(Y_j)`.
    EmpiricalMean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessValue {
    pub value: f64,
    /// `sqrt(n v_n)`.
    pub normalization: f64,
    /// Empirical-mean centering over blocks that are all zero; value forced to 0.
    pub degenerate: bool,
}

/// `f(Y_j)` for every block of the scheme.
pub fn block_values<F: ClusterFunctional + ?Sized>(
    series: &StandardizedSeries,
    scheme: &BlockScheme,
    f: &F,
) -> Result<Vec<f64>> {
    if scheme.n() > series.len() {
        return Err(Error::invalid(format!(
            "block scheme over {} observations exceeds series length {}",
            scheme.n(),
            series.len()
        )));
    }
    Ok(scheme
        .blocks()
        .map(|r| f.evaluate(series.block(r)))
        .collect())
}

fn normalization(n: usize, v_n: f64) -> Result<f64> {
    if !(v_n > 0.0 && v_n <= 1.0) || n == 0 {
        return Err(Error::DegenerateNormalization);
    }
    Ok((n as f64 * v_n).sqrt())
}

fn centered(values: &[f64], centering: Centering<'_>) -> Result<(Vec<f64>, bool)> {
    match centering {
        Centering::Constant(c) => Ok((values.iter().map(|v| v - c).collect(), false)),
        Centering::PerBlock(c) => {
            if c.len() != values.len() {
                return Err(Error::invalid(format!(
                    "{} centering values for {} blocks",
                    c.len(),
                    values.len()
                )));
            }
            Ok((values.iter().zip(c).map(|(v, c)| v - c).collect(), false))
        }
        Centering::EmpiricalMean => {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let degenerate = values.iter().all(|&v| v == 0.0);
            Ok((values.iter().map(|v| v - mean).collect(), degenerate))
        }
    }
}

fn weighted(
    values: &[f64],
    xi: Option<&[f64]>,
    centering: Centering<'_>,
    n: usize,
    v_n: f64,
) -> Result<ProcessValue> {
    let norm = normalization(n, v_n)?;
    if let Some(xi) = xi {
        if xi.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} multipliers for {} blocks",
                xi.len(),
                values.len()
            )));
        }
    }
    let (c, degenerate) = centered(values, centering)?;
    let sum: f64 = match xi {
        Some(xi) => xi.iter().zip(&c).map(|(w, d)| w * d).sum(),
        None => c.iter().sum(),
    };
    Ok(ProcessValue {
        value: if degenerate { 0.0 } else { sum / norm },
        normalization: norm,
        degenerate,
    })
}

/// `Z_n(f)` from precomputed block values `f(Y_j)`.
pub fn empirical_process_from_values(
    values: &[f64],
    centering: Centering<'_>,
    n: usize,
    v_n: f64,
) -> Result<ProcessValue> {
    weighted(values, None, centering, n, v_n)
}

/// `Z_{n,ξ}(f)` from precomputed block values.
pub fn multiplier_process_from_values(
    values: &[f64],
    xi: &[f64],
    centering: Centering<'_>,
    n: usize,
    v_n: f64,
) -> Result<ProcessValue> {
    weighted(values, Some(xi), centering, n, v_n)
}

/// `Z*_{n,ξ}(f)` from precomputed block values.
pub fn bootstrap_process_from_values(
    values: &[f64],
    xi: &[f64],
    n: usize,
    v_n: f64,
) -> Result<ProcessValue> {
    weighted(values, Some(xi), Centering::EmpiricalMean, n, v_n)
}

pub fn empirical_process<F: ClusterFunctional + ?Sized>(
    series: &StandardizedSeries,
    scheme: &BlockScheme,
    f: &F,
    v_n: f64,
    centering: Centering<'_>,
) -> Result<ProcessValue> {
    let values = block_values(series, scheme, f)?;
    empirical_process_from_values(&values, centering, scheme.n(), v_n)
}

pub fn multiplier_process<F: ClusterFunctional + ?Sized>(
    series: &StandardizedSeries,
    scheme: &BlockScheme,
    f: &F,
    xi: &[f64],
    v_n: f64,
    centering: Centering<'_>,
) -> Result<ProcessValue> {
    let values = block_values(series, scheme, f)?;
    multiplier_process_from_values(&values, xi, centering, scheme.n(), v_n)
}

pub fn bootstrap_process<F: ClusterFunctional + ?Sized>(
    series: &StandardizedSeries,
    scheme: &BlockScheme,
    f: &F,
    xi: &[f64],
    v_n: f64,
) -> Result<ProcessValue> {
    let values = block_values(series, scheme, f)?;
    bootstrap_process_from_values(&values, xi, scheme.n(), v_n)
}
