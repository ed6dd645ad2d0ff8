//! Empirical extremogram and the analytic limit for linear processes.

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::sets::{Membership, OrthantSetPair};
use crate::threshold::{estimate_threshold, ThresholdSpec};

/// Which index ranges enter the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// Both sums over `i < n` with `n = len - h_max`; every lag uses the same denominator.
    #[default]
    Modified,
    /// Numerator over `i < len - h`, denominator over all `len` observations.
    DavisMikosch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremogramEstimate {
    /// `ρ̂(h)` for `h = 0..=h_max`; `None` when no observation falls in `aA`.
    pub values: Vec<Option<f64>>,
    pub marginal_count: usize,
    pub joint_counts: Vec<usize>,
    pub threshold: f64,
    pub threshold_spec: ThresholdSpec,
    /// Number of summands in the denominator.
    pub n: usize,
}

impl ExtremogramEstimate {
    pub fn h_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_defined(&self) -> bool {
        self.marginal_count > 0
    }

    fn from_counts(
        marginal_count: usize,
        joint_counts: Vec<usize>,
        threshold: f64,
        threshold_spec: ThresholdSpec,
        n: usize,
    ) -> Self {
        let values = joint_counts
            .iter()
            .map(|&j| (marginal_count > 0).then(|| j as f64 / marginal_count as f64))
            .collect();
        Self {
            values,
            marginal_count,
            joint_counts,
            threshold,
            threshold_spec,
            n,
        }
    }
}

/// Joint and marginal exceedance counts over the first `n` positions.
pub(crate) fn lag_counts(m: &Membership, n: usize, h_max: usize) -> (usize, Vec<usize>) {
    let mut joint = vec![0usize; h_max + 1];
    let mut marginal = 0;
    for i in 0..n {
        if m.in_a[i] {
            marginal += 1;
            for (h, c) in joint.iter_mut().enumerate() {
                *c += usize::from(m.in_b[i + h]);
            }
        }
    }
    (marginal, joint)
}

/// `ρ̂(h) = Σ_{i<n} 1{X_i/a ∈ A, X_{i+h}/a ∈ B} / Σ_{i<n} 1{X_i/a ∈ A}` with `n = len - h_max`.
pub fn empirical_extremogram(
    series: &TimeSeries,
    a: f64,
    pair: &OrthantSetPair,
    h_max: usize,
) -> Result<ExtremogramEstimate> {
    empirical_extremogram_with(series, a, pair, h_max, Convention::Modified)
}

pub fn empirical_extremogram_with(
    series: &TimeSeries,
    a: f64,
    pair: &OrthantSetPair,
    h_max: usize,
    convention: Convention,
) -> Result<ExtremogramEstimate> {
    let n = series.effective_len(h_max)?;
    let m = Membership::compute(series, a, pair)?;
    let spec = ThresholdSpec::Fixed(a);
    Ok(match convention {
        Convention::Modified => {
            let (marginal, joint) = lag_counts(&m, n, h_max);
            ExtremogramEstimate::from_counts(marginal, joint, a, spec, n)
        }
        Convention::DavisMikosch => {
            let total = series.len();
            let marginal = m.in_a.iter().filter(|&&b| b).count();
            let joint = (0..=h_max)
                .map(|h| (0..total - h).filter(|&i| m.joint(i, h)).count())
                .collect();
            ExtremogramEstimate::from_counts(marginal, joint, a, spec, total)
        }
    })
}

/// Extremogram at the data-driven threshold `â` given by `spec`.
pub fn empirical_extremogram_estimated(
    series: &TimeSeries,
    spec: ThresholdSpec,
    pair: &OrthantSetPair,
    h_max: usize,
) -> Result<ExtremogramEstimate> {
    let a = estimate_threshold(series, spec)?;
    let mut est = empirical_extremogram(series, a, pair, h_max)?;
    est.threshold_spec = spec;
    Ok(est)
}

/// Limit extremogram of `X_t = Σ_j ψ_j ε_{t-j}` for `A = B = (1, ∞)`, nonnegative
/// `ψ` and symmetric regularly varying innovations with index `alpha`:
/// `ρ(h) = Σ_j min(ψ_j, ψ_{j+h})^α / Σ_j ψ_j^α`.
pub fn linear_process_extremogram(psi: &[f64], alpha: f64, h_max: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("tail index must be positive"));
    }
    if psi.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
        return Err(Error::invalid(
            "coefficients must be finite and nonnegative",
        ));
    }
    let denom: f64 = psi.iter().map(|c| c.powf(alpha)).sum();
    if denom <= 0.0 {
        return Err(Error::invalid("at least one coefficient must be positive"));
    }
    Ok((0..=h_max)
        .map(|h| {
            let num: f64 = psi
                .iter()
                .zip(psi.iter().skip(h))
                .fold(0.0, |acc, (a, b)| acc + a.min(*b).powf(alpha));
            num / denom
        })
        .collect())
}

/// Coefficients `φ^j`, truncated once they fall below `tol` relative to `ψ_0`.
pub fn ar1_coefficients(phi: f64, tol: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut c = 1.0_f64;
    while c.abs() > tol && out.len() < 100_000 {
        c *= phi;
        out.push(c);
    }
    out
}
