//! Threshold selection from order statistics.

use std::fmt;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    /// `â_k`: the `(⌊n/k⌋ + 1)`-largest max-norm.
    OrderStatistic(usize),
    /// Type-1 empirical `(1 - p)`-quantile.
    EmpiricalQuantile(f64),
    Fixed(f64),
}

impl ThresholdSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            ThresholdSpec::OrderStatistic(k) => {
                if k == 0 {
                    return Err(Error::invalid("order-statistic k must be positive"));
                }
                let top = n / k;
                if top < 1 || n - top < 1 {
                    return Err(Error::invalid(format!(
                        "order-statistic k={k} invalid for n={n}: need 1 <= n/k < n"
                    )));
                }
            }
            ThresholdSpec::EmpiricalQuantile(p) => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::invalid(format!(
                        "exceedance probability {p} outside (0, 1)"
                    )));
                }
            }
            ThresholdSpec::Fixed(a) => {
                if !a.is_finite() {
                    return Err(Error::invalid("fixed threshold must be finite"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ThresholdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdSpec::OrderStatistic(k) => write!(f, "order_statistic:{k}"),
            ThresholdSpec::EmpiricalQuantile(p) => write!(f, "quantile:{p}"),
            ThresholdSpec::Fixed(a) => write!(f, "fixed:{a}"),
        }
    }
}

/// 1-based rank `⌈q·n⌉` clamped to `1..=n`; products within rounding noise of an
/// integer are snapped so that e.g. `0.95 * 100` gives rank 95.
pub fn ceil_rank(q: f64, n: usize) -> usize {
    let x = q * n as f64;
    let nearest = x.round();
    let rank = if (x - nearest).abs() <= 1e-9 * (n as f64).max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (rank.max(1.0) as usize).min(n)
}

/// `rank`-th ascending order statistic (1-based) of `values`, without sorting everything.
pub(crate) fn order_statistic(values: &mut [f64], rank: usize) -> f64 {
    debug_assert!(rank >= 1 && rank <= values.len());
    let (_, v, _) = values.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *v
}

/// Threshold `a` for the given spec. Vector series are reduced to max-norms
/// for both order-statistic based specs.
pub fn estimate_threshold(series: &TimeSeries, spec: ThresholdSpec) -> Result<f64> {
    let n = series.len();
    spec.validate(n)?;
    let a = match spec {
        ThresholdSpec::OrderStatistic(k) => {
            let mut norms = series.norms();
            order_statistic(&mut norms, n - n / k)
        }
        ThresholdSpec::EmpiricalQuantile(p) => {
            let mut vals = if series.is_scalar() {
                series.as_flat().to_vec()
            } else {
                series.norms()
            };
            order_statistic(&mut vals, ceil_rank(1.0 - p, n))
        }
        ThresholdSpec::Fixed(a) => a,
    };
    if a > 0.0 {
        Ok(a)
    } else {
        Err(Error::DegenerateThreshold(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(n: usize) -> TimeSeries {
        TimeSeries::new((1..=n).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn order_statistic_example() {
        assert_eq!(
            estimate_threshold(&seq(10), ThresholdSpec::OrderStatistic(5)).unwrap(),
            8.0
        );
    }

    #[test]
    fn quantile_example() {
        let a = estimate_threshold(&seq(100), ThresholdSpec::EmpiricalQuantile(0.05)).unwrap();
        assert_eq!(a, 95.0);
    }

    #[test]
    fn fixed_passthrough() {
        assert_eq!(
            estimate_threshold(&seq(3), ThresholdSpec::Fixed(1.7)).unwrap(),
            1.7
        );
    }

    #[test]
    fn invalid_specs() {
        let s = seq(10);
        assert!(estimate_threshold(&s, ThresholdSpec::OrderStatistic(11)).is_err());
        assert!(estimate_threshold(&s, ThresholdSpec::OrderStatistic(1)).is_err());
        assert!(estimate_threshold(&s, ThresholdSpec::EmpiricalQuantile(0.0)).is_err());
        assert!(estimate_threshold(&s, ThresholdSpec::EmpiricalQuantile(1.0)).is_err());
    }

    #[test]
    fn nonpositive_threshold_is_degenerate() {
        let s = TimeSeries::new(vec![-3.0, -2.0, -1.0, 0.0]).unwrap();
        assert!(matches!(
            estimate_threshold(&s, ThresholdSpec::EmpiricalQuantile(0.5)),
            Err(Error::DegenerateThreshold(_))
        ));
        assert!(matches!(
            estimate_threshold(&s, ThresholdSpec::Fixed(-1.0)),
            Err(Error::DegenerateThreshold(_))
        ));
    }

    #[test]
    fn ceil_rank_snaps() {
        assert_eq!(ceil_rank(0.95, 100), 95);
        assert_eq!(ceil_rank(0.95, 99), 95);
        assert_eq!(ceil_rank(0.99, 2000), 1980);
        assert_eq!(ceil_rank(0.975, 2000), 1950);
        assert_eq!(ceil_rank(0.0, 10), 1);
    }

    proptest! {
        #[test]
        fn order_statistic_matches_sort(
            xs in prop::collection::vec(-100.0f64..100.0, 2..200),
            k in 2usize..50,
        ) {
            let n = xs.len();
            prop_assume!(n / k >= 1);
            let s = TimeSeries::new(xs.clone()).unwrap();
            let mut sorted: Vec<f64> = xs.iter().map(|v| v.abs()).collect();
            sorted.sort_by(f64::total_cmp);
            let expect = sorted[n - n / k - 1];
            match estimate_threshold(&s, ThresholdSpec::OrderStatistic(k)) {
                Ok(a) => prop_assert_eq!(a, expect),
                Err(_) => prop_assert!(expect <= 0.0),
            }
        }

        #[test]
        fn scale_equivariant(
            xs in prop::collection::vec(0.01f64..100.0, 5..100),
            c in 0.001f64..1000.0,
            p in 0.01f64..0.5,
        ) {
            let s = TimeSeries::new(xs).unwrap();
            let cs = s.scaled(c).unwrap();
            for spec in [ThresholdSpec::EmpiricalQuantile(p), ThresholdSpec::OrderStatistic(3)] {
                let a = estimate_threshold(&s, spec).unwrap();
                let ca = estimate_threshold(&cs, spec).unwrap();
                prop_assert_eq!(ca, a * c);
            }
        }
    }
}
