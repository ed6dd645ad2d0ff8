//! Pairs of upper-right orthants and exceedance bookkeeping.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// `A = λ·(x_A, ∞)`, `B = λ·(x_B, ∞)` with open (strict) lower boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantSetPair {
    lower_a: Vec<f64>,
    lower_b: Vec<f64>,
    scale: f64,
}

impl OrthantSetPair {
    pub fn new(lower_a: Vec<f64>, lower_b: Vec<f64>) -> Result<Self> {
        if lower_a.is_empty() || lower_a.len() != lower_b.len() {
            return Err(Error::invalid(
                "orthant corners must be non-empty and of equal dimension",
            ));
        }
        if lower_a.iter().chain(&lower_b).any(|v| !v.is_finite()) {
            return Err(Error::invalid("orthant corners must be finite"));
        }
        Ok(Self {
            lower_a,
            lower_b,
            scale: 1.0,
        })
    }

    /// `A = B = (1, ∞)^d`, the tail-dependence pair.
    pub fn tail(dim: usize) -> Self {
        Self {
            lower_a: vec![1.0; dim],
            lower_b: vec![1.0; dim],
            scale: 1.0,
        }
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("scale {lambda} must be positive")));
        }
        Ok(Self {
            scale: self.scale * lambda,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.lower_a.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn lower_a(&self) -> &[f64] {
        &self.lower_a
    }

    pub fn lower_b(&self) -> &[f64] {
        &self.lower_b
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower_a == self.lower_b
    }

    /// Coordinatewise bounds in the original scale: `x/a ∈ λ(x_A, ∞)` iff `x > a·λ·x_A`.
    pub(crate) fn bounds(&self, a: f64) -> (Vec<f64>, Vec<f64>) {
        let f = |c: &f64| a * (self.scale * c);
        (
            self.lower_a.iter().map(f).collect(),
            self.lower_b.iter().map(f).collect(),
        )
    }

    /// `x/a ∈ A`.
    pub fn contains_a(&self, x: &[f64], a: f64) -> bool {
        above(x, &self.bounds(a).0)
    }

    /// `x/a ∈ B`.
    pub fn contains_b(&self, x: &[f64], a: f64) -> bool {
        above(x, &self.bounds(a).1)
    }
}

#[inline]
fn above(x: &[f64], bound: &[f64]) -> bool {
    x.iter().zip(bound).all(|(v, b)| v > b)
}

/// Membership of every observation of the series in `aA` and `aB`.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub in_a: Vec<bool>,
    pub in_b: Vec<bool>,
}

impl Membership {
    pub fn compute(series: &TimeSeries, a: f64, pair: &OrthantSetPair) -> Result<Self> {
        check_threshold(a)?;
        if pair.dim() != series.dim() {
            return Err(Error::invalid(format!(
                "set dimension {} does not match series dimension {}",
                pair.dim(),
                series.dim()
            )));
        }
        let (ba, bb) = pair.bounds(a);
        let in_a = series.observations().map(|x| above(x, &ba)).collect();
        let in_b = if pair.is_symmetric() {
            None
        } else {
            Some(series.observations().map(|x| above(x, &bb)).collect())
        };
        Ok(match in_b {
            Some(in_b) => Self { in_a, in_b },
            None => Self {
                in_b: in_a.clone(),
                in_a,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.in_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_a.is_empty()
    }

    #[inline]
    pub fn joint(&self, i: usize, lag: usize) -> bool {
        self.in_a[i] && self.in_b[i + lag]
    }
}

pub(crate) fn check_threshold(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateThreshold(a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indicators {
    /// `1{X_i/a ∈ A}` for `i < n`.
    pub marginal: Vec<bool>,
    /// `1{X_i/a ∈ A, X_{i+h}/a ∈ B}` for `i < n`.
    pub joint: Vec<bool>,
}

/// Marginal and joint exceedance indicators over the first `n` observations at lag `lag`.
pub fn exceedance_indicators(
    series: &TimeSeries,
    a: f64,
    pair: &OrthantSetPair,
    lag: usize,
    n: usize,
) -> Result<Indicators> {
    if n + lag > series.len() {
        return Err(Error::invalid(format!(
            "series of length {} shorter than n + h = {}",
            series.len(),
            n + lag
        )));
    }
    let m = Membership::compute(series, a, pair)?;
    Ok(Indicators {
        marginal: m.in_a[..n].to_vec(),
        joint: (0..n).map(|i| m.joint(i, lag)).collect(),
    })
}

/// Fraction of observations outside the lower orthant `(-∞, a·x*)^d`.
pub fn estimate_vn(series: &TimeSeries, a: f64, x_star: f64) -> Result<f64> {
    check_threshold(a)?;
    if x_star.is_nan() || x_star <= 0.0 {
        return Err(Error::invalid("x_star must be positive"));
    }
    let bound = a * x_star;
    let hits = series
        .observations()
        .filter(|x| x.iter().any(|&v| v >= bound))
        .count();
    Ok(hits as f64 / series.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hand_enumerated_indicators() {
        let x = s(&[2.0, 3.0, 0.5, 2.5, 2.6]);
        let ind = exceedance_indicators(&x, 1.0, &OrthantSetPair::tail(1), 1, 4).unwrap();
        assert_eq!(ind.marginal, vec![true, true, false, true]);
        assert_eq!(ind.joint, vec![true, false, false, true]);
    }

    #[test]
    fn no_exceedances() {
        let x = s(&[0.1, 0.2, 0.3]);
        let ind = exceedance_indicators(&x, 1.0, &OrthantSetPair::tail(1), 1, 2).unwrap();
        assert!(ind.marginal.iter().chain(&ind.joint).all(|b| !b));
    }

    #[test]
    fn lag_zero_symmetric_joint_is_marginal() {
        let x = s(&[2.0, 0.3, 1.5, 0.9]);
        let ind = exceedance_indicators(&x, 1.0, &OrthantSetPair::tail(1), 0, 4).unwrap();
        assert_eq!(ind.joint, ind.marginal);
    }

    #[test]
    fn strict_membership() {
        let pair = OrthantSetPair::tail(1);
        assert!(!pair.contains_a(&[1.0], 1.0));
        assert!(pair.contains_a(&[1.0 + 1e-12], 1.0));
        let vec_pair = OrthantSetPair::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(vec_pair.contains_a(&[1.5, 2.5], 1.0));
        assert!(!vec_pair.contains_a(&[1.5, 1.5], 1.0));
        assert!(vec_pair.scaled(2.0).unwrap().contains_a(&[2.5, 4.5], 1.0));
        assert!(!vec_pair.scaled(2.0).unwrap().contains_a(&[1.5, 2.5], 1.0));
    }

    #[test]
    fn too_short_series() {
        let x = s(&[1.0, 2.0]);
        assert!(exceedance_indicators(&x, 1.0, &OrthantSetPair::tail(1), 1, 2).is_err());
        assert!(exceedance_indicators(&x, 0.0, &OrthantSetPair::tail(1), 0, 2).is_err());
    }

    #[test]
    fn vn_examples() {
        assert_eq!(
            estimate_vn(&s(&[2.0, 0.5, 3.0, 0.1]), 1.0, 1.0).unwrap(),
            0.5
        );
        assert_eq!(estimate_vn(&s(&[2.0, 3.0]), 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(estimate_vn(&s(&[0.2, 0.3]), 1.0, 1.0).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn indicators_scale_invariant(
            xs in prop::collection::vec(-5.0f64..5.0, 3..60),
            a in 0.1f64..3.0,
            k in -8i32..8,
            lag in 0usize..3,
        ) {
            prop_assume!(xs.len() > lag);
            let c = 2f64.powi(k);
            let x = TimeSeries::new(xs).unwrap();
            let n = x.len() - lag;
            let pair = OrthantSetPair::tail(1);
            let base = exceedance_indicators(&x, a, &pair, lag, n).unwrap();
            let scaled = exceedance_indicators(&x.scaled(c).unwrap(), a * c, &pair, lag, n).unwrap();
            prop_assert_eq!(base, scaled);
        }

        #[test]
        fn vn_nonincreasing(
            xs in prop::collection::vec(-5.0f64..5.0, 1..60),
            a1 in 0.1f64..3.0, da in 0.0f64..2.0,
            x1 in 0.1f64..3.0, dx in 0.0f64..2.0,
        ) {
            let x = TimeSeries::new(xs).unwrap();
            let v = estimate_vn(&x, a1, x1).unwrap();
            prop_assert!(estimate_vn(&x, a1 + da, x1).unwrap() <= v);
            prop_assert!(estimate_vn(&x, a1, x1 + dx).unwrap() <= v);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
