//! Bootstrap quantiles, pointwise confidence intervals and sup-norm bands.

use std::fmt;

use crate::error::{Error, Result};
use crate::threshold::{ceil_rank, order_statistic};

/// Lower and upper empirical `α/2`-quantiles of one lag's replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapQuantiles {
    pub lower: f64,
    pub upper: f64,
    pub defined: usize,
    pub undefined: usize,
}

/// `l_b` is the `⌈(α/2)·B⌉`-th smallest and `u_b` the `⌈(α/2)·B⌉`-th largest of
/// the `B` defined replicates; undefined replicates are dropped and counted.
pub fn bootstrap_quantiles(replicates: &[Option<f64>], alpha: f64) -> Result<BootstrapQuantiles> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} outside (0, 1)")));
    }
    let mut vals: Vec<f64> = replicates.iter().flatten().copied().collect();
    let b = vals.len();
    if b == 0 {
        return Err(Error::NoInterval);
    }
    let undefined = replicates.len() - b;
    if undefined > 0 {
        log::debug!("{undefined} of {} replicates undefined", replicates.len());
    }
    let k = ceil_rank(alpha / 2.0, b);
    let lower = order_statistic(&mut vals, k);
    let upper = order_statistic(&mut vals, b + 1 - k);
    Ok(BootstrapQuantiles {
        lower,
        upper,
        defined: b,
        undefined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CiMethod {
    Direct,
    /// Error distribution borrowed from the bootstrap at exceedance probability `p2`.
    Transfer {
        p1: f64,
        p2: f64,
    },
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CiMethod::Direct => write!(f, "direct"),
            CiMethod::Transfer { p1, p2 } => write!(f, "transfer:{p1}:{p2}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: CiMethod,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `[b1 - c(u - b2), b1 - c(l - b2)]`, endpoints clamped to `[0, 1]`.
fn shifted(b1: f64, b2: f64, c: f64, q: &BootstrapQuantiles) -> (f64, f64) {
    let lo = (b1 - c * (q.upper - b2)).clamp(0.0, 1.0);
    let hi = (b1 - c * (q.lower - b2)).clamp(0.0, 1.0);
    (lo, hi)
}

/// `[2ρ̂ - u_b, 2ρ̂ - l_b] ∩ [0, 1]`.
pub fn ci_direct(base: f64, q: &BootstrapQuantiles, level: f64) -> ConfidenceInterval {
    let (lower, upper) = shifted(base, base, 1.0, q);
    ConfidenceInterval {
        lower,
        upper,
        level,
        method: CiMethod::Direct,
    }
}

/// `[ρ̂_{p1} - c(u_b - ρ̂_{p2}), ρ̂_{p1} - c(l_b - ρ̂_{p2})] ∩ [0, 1]` with
/// `c = sqrt(p2/p1)` and quantiles from the bootstrap at `p2`.
pub fn ci_transfer(
    base_p1: f64,
    base_p2: f64,
    q_p2: &BootstrapQuantiles,
    p1: f64,
    p2: f64,
    level: f64,
) -> Result<ConfidenceInterval> {
    if !(p1 > 0.0 && p1 <= p2 && p2 < 1.0) {
        return Err(Error::invalid(format!(
            "need 0 < p1 <= p2 < 1, got {p1}, {p2}"
        )));
    }
    let c = (p2 / p1).sqrt();
    let (lower, upper) = shifted(base_p1, base_p2, c, q_p2);
    Ok(ConfidenceInterval {
        lower,
        upper,
        level,
        method: CiMethod::Transfer { p1, p2 },
    })
}

/// Radius `λ_α` of the sup-norm band `ρ̂ ± λ_α` over the lag grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimultaneousBand {
    pub radius: f64,
    pub alpha: f64,
    pub rows_used: usize,
}

impl SimultaneousBand {
    pub fn contains(&self, base: &[f64], truth: &[f64]) -> bool {
        base.iter()
            .zip(truth)
            .all(|(b, t)| (b - t).abs() <= self.radius)
    }
}

/// Smallest `λ` such that at least a fraction `alpha` of the fully defined
/// replicate rows satisfy `max_h |ρ̂*_b(h) - ρ̂(h)| <= λ`.
pub fn simultaneous_band(
    rows: &[Vec<Option<f64>>],
    base: &[Option<f64>],
    alpha: f64,
) -> Result<SimultaneousBand> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} outside (0, 1]")));
    }
    let base: Option<Vec<f64>> = base.iter().copied().collect();
    let base = base.ok_or(Error::NoBand)?;
    let mut sups: Vec<f64> = rows
        .iter()
        .filter_map(|row| {
            if row.len() != base.len() {
                return None;
            }
            row.iter()
                .zip(&base)
                .map(|(r, b)| r.map(|r| (r - b).abs()))
                .try_fold(0.0_f64, |m, d| d.map(|d| m.max(d)))
        })
        .collect();
    if sups.is_empty() {
        return Err(Error::NoBand);
    }
    let rows_used = sups.len();
    let radius = order_statistic(&mut sups, ceil_rank(alpha, rows_used));
    Ok(SimultaneousBand {
        radius,
        alpha,
        rows_used,
    })
}
