//! Benchmark time-series models and the samplers they need.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub const GARCH_BURN_IN: usize = 2000;
pub const AR_BURN_IN: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnovationDist {
    /// Student t with `nu` degrees of freedom; unit scale unless `unit_variance`.
    StudentT {
        nu: f64,
        unit_variance: bool,
    },
    /// `P{ε > x} = P{ε < -x} = (1 - exp(-x^{-α}))/2`.
    SymmetrizedFrechet {
        alpha: f64,
    },
    StandardNormal,
}

impl InnovationDist {
    pub fn student_t(nu: f64) -> Self {
        InnovationDist::StudentT {
            nu,
            unit_variance: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationDist::StudentT { nu, unit_variance } => {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(Error::invalid("t degrees of freedom must be positive"));
                }
                if unit_variance && nu <= 2.0 {
                    return Err(Error::invalid("unit-variance t requires nu > 2"));
                }
            }
            InnovationDist::SymmetrizedFrechet { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::invalid("Frechet tail index must be positive"));
                }
            }
            InnovationDist::StandardNormal => {}
        }
        Ok(())
    }

    /// `E[ε²]`, infinite when it does not exist.
    pub fn second_moment(&self) -> f64 {
        match *self {
            InnovationDist::StudentT {
                unit_variance: true,
                ..
            }
            | InnovationDist::StandardNormal => 1.0,
            InnovationDist::StudentT { nu, .. } if nu > 2.0 => nu / (nu - 2.0),
            InnovationDist::SymmetrizedFrechet { alpha } if alpha > 2.0 => {
                libm::tgamma(1.0 - 2.0 / alpha)
            }
            _ => f64::INFINITY,
        }
    }

    /// Sampler bound to validated parameters.
    pub fn sampler(&self) -> Result<Innovations> {
        self.validate()?;
        Ok(match *self {
            InnovationDist::StudentT { nu, unit_variance } => Innovations::T {
                dist: StudentT::new(nu).map_err(|e| Error::invalid(e.to_string()))?,
                scale: if unit_variance {
                    ((nu - 2.0) / nu).sqrt()
                } else {
                    1.0
                },
            },
            InnovationDist::SymmetrizedFrechet { alpha } => Innovations::Frechet { alpha },
            InnovationDist::StandardNormal => Innovations::Normal,
        })
    }
}

impl fmt::Display for InnovationDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnovationDist::StudentT {
                nu,
                unit_variance: false,
            } => write!(f, "student_t:{nu}"),
            InnovationDist::StudentT {
                nu,
                unit_variance: true,
            } => write!(f, "student_t_unit_var:{nu}"),
            InnovationDist::SymmetrizedFrechet { alpha } => write!(f, "frechet:{alpha}"),
            InnovationDist::StandardNormal => write!(f, "normal"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Innovations {
    T { dist: StudentT<f64>, scale: f64 },
    Frechet { alpha: f64 },
    Normal,
}

impl Distribution<f64> for Innovations {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Innovations::T { dist, scale } => scale * dist.sample(rng),
            Innovations::Frechet { alpha } => sample_symmetrized_frechet(*alpha, rng),
            Innovations::Normal => rng.sample(StandardNormal),
        }
    }
}

/// Random sign times `(-ln U)^{-1/α}`, the inverse of the Fréchet CDF `exp(-x^{-α})`.
pub fn sample_symmetrized_frechet<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let positive: bool = rng.random();
    let u: f64 = rng.sample(Open01);
    let magnitude = (-u.ln()).powf(-1.0 / alpha);
    if positive {
        magnitude
    } else {
        -magnitude
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Garch {
        alpha0: f64,
        alpha1: f64,
        beta1: f64,
        innovation: InnovationDist,
    },
    Ar1 {
        phi: f64,
        innovation: InnovationDist,
    },
    Ma {
        coefficients: Vec<f64>,
        innovation: InnovationDist,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub model: Model,
    pub burn_in: usize,
}

impl ModelSpec {
    pub fn garch(alpha0: f64, alpha1: f64, beta1: f64, innovation: InnovationDist) -> Self {
        Self {
            model: Model::Garch {
                alpha0,
                alpha1,
                beta1,
                innovation,
            },
            burn_in: GARCH_BURN_IN,
        }
    }

    /// t-GARCH(1,1) with `α₀ = 1e-4, α₁ = 0.08, β₁ = 0.9` and unit-variance t₈ innovations.
    pub fn reference_garch() -> Self {
        Self::garch(
            1e-4,
            0.08,
            0.9,
            InnovationDist::StudentT {
                nu: 8.0,
                unit_variance: true,
            },
        )
    }

    pub fn ar1(phi: f64, innovation: InnovationDist) -> Self {
        Self {
            model: Model::Ar1 { phi, innovation },
            burn_in: AR_BURN_IN,
        }
    }

    /// AR(1) with `φ = 0.8` and symmetrized Fréchet(3) innovations.
    pub fn reference_ar1() -> Self {
        Self::ar1(0.8, InnovationDist::SymmetrizedFrechet { alpha: 3.0 })
    }

    pub fn ma(coefficients: Vec<f64>, innovation: InnovationDist) -> Self {
        Self {
            model: Model::Ma {
                coefficients,
                innovation,
            },
            burn_in: 0,
        }
    }

    /// `X_t = ε_t + 0.5 ε_{t-1} + 0.8 ε_{t-2}` with symmetrized Fréchet(3) innovations.
    pub fn reference_ma() -> Self {
        Self::ma(
            vec![1.0, 0.5, 0.8],
            InnovationDist::SymmetrizedFrechet { alpha: 3.0 },
        )
    }

    pub fn innovation(&self) -> InnovationDist {
        match &self.model {
            Model::Garch { innovation, .. }
            | Model::Ar1 { innovation, .. }
            | Model::Ma { innovation, .. } => *innovation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.innovation().validate()?;
        match &self.model {
            Model::Garch {
                alpha0,
                alpha1,
                beta1,
                ..
            } => {
                if !(*alpha0 > 0.0 && *alpha1 >= 0.0 && *beta1 >= 0.0)
                    || ![alpha0, alpha1, beta1].iter().all(|v| v.is_finite())
                {
                    return Err(Error::invalid(
                        "GARCH requires alpha0 > 0, alpha1 >= 0, beta1 >= 0",
                    ));
                }
            }
            Model::Ar1 { phi, .. } => {
                if phi.is_nan() || phi.abs() >= 1.0 {
                    return Err(Error::invalid(format!(
                        "AR(1) requires |phi| < 1, got {phi}"
                    )));
                }
            }
            Model::Ma { coefficients, .. } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid(
                        "MA coefficients must be finite and non-empty",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Parameter combinations that are legal but outside the stationary regime.
    pub fn warnings(&self) -> Vec<String> {
        match &self.model {
            Model::Garch {
                alpha1,
                beta1,
                innovation,
                ..
            } => {
                let persistence = alpha1 * innovation.second_moment() + beta1;
                if persistence >= 1.0 {
                    vec![format!(
                        "alpha1 * E[eps^2] + beta1 = {persistence} >= 1: GARCH is not covariance stationary"
                    )]
                } else {
                    Vec::new()
                }
            }
            _ => Vec::new(),
        }
    }

    /// Coefficients of the moving-average representation for linear models.
    pub fn linear_coefficients(&self) -> Option<Vec<f64>> {
        match &self.model {
            Model::Garch { .. } => None,
            Model::Ar1 { phi, .. } => Some(crate::extremogram::ar1_coefficients(*phi, 1e-14)),
            Model::Ma { coefficients, .. } => Some(coefficients.clone()),
        }
    }

    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<TimeSeries> {
        match &self.model {
            Model::Garch { .. } => simulate_garch(self, n, rng),
            Model::Ar1 { .. } => simulate_ar1(self, n, rng),
            Model::Ma { .. } => simulate_ma(self, n, rng),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.model {
            Model::Garch {
                alpha0,
                alpha1,
                beta1,
                innovation,
            } => write!(f, "garch({alpha0},{alpha1},{beta1},{innovation})")?,
            Model::Ar1 { phi, innovation } => write!(f, "ar1({phi},{innovation})")?,
            Model::Ma {
                coefficients,
                innovation,
            } => {
                let c: Vec<String> = coefficients.iter().map(f64::to_string).collect();
                write!(f, "ma([{}],{innovation})", c.join(","))?
            }
        }
        write!(f, "/burn_in={}", self.burn_in)
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("series length must be at least 1"))
    } else {
        Ok(())
    }
}

/// `X_t = σ_t ε_t`, `σ_t² = α₀ + α₁ X_{t-1}² + β₁ σ_{t-1}²`, started at the
/// unconditional variance when it exists.
pub fn simulate_garch<R: Rng + ?Sized>(
    spec: &ModelSpec,
    n: usize,
    rng: &mut R,
) -> Result<TimeSeries> {
    spec.validate()?;
    check_len(n)?;
    let Model::Garch {
        alpha0,
        alpha1,
        beta1,
        innovation,
    } = spec.model
    else {
        return Err(Error::invalid("not a GARCH spec"));
    };
    for w in spec.warnings() {
        log::warn!("{w}");
    }
    let eps = innovation.sampler()?;
    let persistence = alpha1 * innovation.second_moment() + beta1;
    let mut sigma2 = if persistence < 1.0 {
        alpha0 / (1.0 - persistence)
    } else {
        alpha0
    };
    let total = spec.burn_in + n;
    let mut out = Vec::with_capacity(n);
    let mut x = sigma2.sqrt() * eps.sample(rng);
    if spec.burn_in == 0 {
        out.push(x);
    }
    for t in 1..total {
        sigma2 = alpha0 + alpha1 * x * x + beta1 * sigma2;
        x = sigma2.sqrt() * eps.sample(rng);
        if t >= spec.burn_in {
            out.push(x);
        }
    }
    TimeSeries::new(out)
}

/// `X_t = φ X_{t-1} + ε_t` from `X_0 = 0`, discarding `burn_in` steps.
pub fn simulate_ar1<R: Rng + ?Sized>(
    spec: &ModelSpec,
    n: usize,
    rng: &mut R,
) -> Result<TimeSeries> {
    spec.validate()?;
    check_len(n)?;
    let Model::Ar1 { phi, innovation } = spec.model else {
        return Err(Error::invalid("not an AR(1) spec"));
    };
    let eps = innovation.sampler()?;
    let mut x = 0.0;
    for _ in 0..spec.burn_in {
        x = phi * x + eps.sample(rng);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        x = phi * x + eps.sample(rng);
        out.push(x);
    }
    TimeSeries::new(out)
}

/// `X_t = Σ_j ψ_j ε_{t-j}` with `q` extra leading innovations drawn.
pub fn simulate_ma<R: Rng + ?Sized>(spec: &ModelSpec, n: usize, rng: &mut R) -> Result<TimeSeries> {
    spec.validate()?;
    check_len(n)?;
    let Model::Ma {
        coefficients,
        innovation,
    } = &spec.model
    else {
        return Err(Error::invalid("not an MA spec"));
    };
    let eps = innovation.sampler()?;
    let q = coefficients.len() - 1;
    let innovations: Vec<f64> = (0..n + q).map(|_| eps.sample(rng)).collect();
    TimeSeries::new(ma_filter(coefficients, &innovations))
}

/// `out[t] = Σ_j ψ_j e[t + q - j]` for `t < e.len() - q`.
pub fn ma_filter(psi: &[f64], innovations: &[f64]) -> Vec<f64> {
    let q = psi.len() - 1;
    innovations
        .windows(q + 1)
        .map(|w| psi.iter().enumerate().map(|(j, c)| c * w[q - j]).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierDist {
    /// Student t with `nu > 2` degrees of freedom scaled to unit variance.
    ScaledStudentT {
        nu: f64,
    },
    StandardNormal,
}

impl Default for MultiplierDist {
    fn default() -> Self {
        MultiplierDist::ScaledStudentT { nu: 5.0 }
    }
}

impl fmt::Display for MultiplierDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiplierDist::ScaledStudentT { nu } => write!(f, "student_t:{nu}"),
            MultiplierDist::StandardNormal => write!(f, "normal"),
        }
    }
}

impl MultiplierDist {
    pub fn sampler(&self) -> Result<Innovations> {
        match *self {
            MultiplierDist::ScaledStudentT { nu } => {
                if !(nu > 2.0 && nu.is_finite()) {
                    return Err(Error::invalid(format!(
                        "multiplier t needs nu > 2 for unit variance, got {nu}"
                    )));
                }
                InnovationDist::StudentT {
                    nu,
                    unit_variance: true,
                }
                .sampler()
            }
            MultiplierDist::StandardNormal => Ok(Innovations::Normal),
        }
    }
}

/// `m` i.i.d. mean-zero, unit-variance multipliers `ξ_j`.
pub fn sample_multipliers<R: Rng + ?Sized>(
    dist: MultiplierDist,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("need at least one multiplier"));
    }
    let s = dist.sampler()?;
    Ok((0..m).map(|_| s.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        (
            m,
            x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0),
        )
    }

    fn lag1_acf(x: &[f64]) -> f64 {
        let (m, _) = mean_var(x);
        let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let den: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        num / den
    }

    #[test]
    fn frechet_median_and_tail() {
        let mut rng = stream(11, &[0]);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_symmetrized_frechet(3.0, &mut rng))
            .collect();
        let mut abs: Vec<f64> = draws.iter().map(|v| v.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let median = 0.5 * (abs[49_999] + abs[50_000]);
        assert!(
            (median - 2f64.ln().powf(-1.0 / 3.0)).abs() < 0.01,
            "{median}"
        );
        let above = draws.iter().filter(|&&v| v > 1.0).count() as f64 / 1e5;
        assert!(
            (above - (1.0 - (-1f64).exp()) / 2.0).abs() < 0.005,
            "{above}"
        );
        let sign_mean = draws.iter().map(|v| v.signum()).sum::<f64>() / 1e5;
        assert!(sign_mean.abs() < 0.01);
    }

    #[test]
    fn frechet_hill_estimate() {
        let mut rng = stream(12, &[0]);
        let mut abs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_symmetrized_frechet(3.0, &mut rng))
            .filter(|v| *v > 0.0)
            .collect();
        abs.sort_by(|a, b| b.total_cmp(a));
        let k = 10_000;
        let hill = (0..k).map(|i| (abs[i] / abs[k]).ln()).sum::<f64>() / k as f64;
        let alpha = 1.0 / hill;
        assert!((2.7..=3.3).contains(&alpha), "{alpha}");
    }

    #[test]
    fn multipliers_unit_variance() {
        let mut rng = stream(13, &[0]);
        let xi = sample_multipliers(MultiplierDist::default(), 1_000_000, &mut rng).unwrap();
        let (m, v) = mean_var(&xi);
        assert!(m.abs() < 0.004, "{m}");
        assert!((v - 1.0).abs() < 0.01, "{v}");
        let again =
            sample_multipliers(MultiplierDist::default(), 5, &mut stream(13, &[0])).unwrap();
        assert_eq!(&again[..], &xi[..5]);
        assert!(
            sample_multipliers(MultiplierDist::ScaledStudentT { nu: 2.0 }, 3, &mut rng).is_err()
        );
    }

    #[test]
    fn garch_degenerate_is_scaled_iid() {
        let spec = ModelSpec::garch(4.0, 0.0, 0.0, InnovationDist::StandardNormal);
        let x = spec.simulate(100_000, &mut stream(1, &[0])).unwrap();
        let (_, v) = mean_var(x.as_flat());
        assert!((v - 4.0).abs() < 0.08, "{v}");
        assert!(lag1_acf(x.as_flat()).abs() < 0.01);
    }

    #[test]
    fn garch_reference_parameters_and_determinism() {
        let spec = ModelSpec::reference_garch();
        spec.validate().unwrap();
        assert!(spec.warnings().is_empty());
        let a = spec.simulate(500, &mut stream(5, &[1])).unwrap();
        let b = spec.simulate(500, &mut stream(5, &[1])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        let bad = ModelSpec::garch(0.0, 0.1, 0.1, InnovationDist::StandardNormal);
        assert!(bad.validate().is_err());
        let unstable = ModelSpec::garch(1.0, 0.5, 0.6, InnovationDist::StandardNormal);
        assert!(unstable.validate().is_ok());
        assert_eq!(unstable.warnings().len(), 1);
        // Unit-scale t8 has variance 4/3, which pushes the reference parameters past 1.
        let unit_scale = ModelSpec::garch(1e-4, 0.08, 0.9, InnovationDist::student_t(8.0));
        assert_eq!(unit_scale.warnings().len(), 1);
    }

    #[test]
    fn innovation_second_moments() {
        assert_eq!(InnovationDist::student_t(8.0).second_moment(), 8.0 / 6.0);
        assert_eq!(InnovationDist::StandardNormal.second_moment(), 1.0);
        assert!(InnovationDist::student_t(2.0).second_moment().is_infinite());
        let g = InnovationDist::SymmetrizedFrechet { alpha: 3.0 }.second_moment();
        assert!((g - 2.678_938_534_707_747_6).abs() < 1e-12);
        assert!(InnovationDist::SymmetrizedFrechet { alpha: 2.0 }
            .second_moment()
            .is_infinite());
    }

    #[test]
    fn ar1_properties() {
        let iid = ModelSpec {
            burn_in: 0,
            ..ModelSpec::ar1(0.0, InnovationDist::StandardNormal)
        };
        let x = iid.simulate(10, &mut stream(3, &[0])).unwrap();
        let s = InnovationDist::StandardNormal.sampler().unwrap();
        let mut rng = stream(3, &[0]);
        let direct: Vec<f64> = (0..10).map(|_| s.sample(&mut rng)).collect();
        assert_eq!(x.as_flat(), &direct[..]);

        let ar = ModelSpec::ar1(0.8, InnovationDist::StandardNormal);
        let x = ar.simulate(100_000, &mut stream(4, &[0])).unwrap();
        assert!((lag1_acf(x.as_flat()) - 0.8).abs() < 0.01);
        assert!(ModelSpec::ar1(1.0, InnovationDist::StandardNormal)
            .validate()
            .is_err());
    }

    #[test]
    fn ma_properties() {
        let id = ModelSpec::ma(vec![1.0], InnovationDist::StandardNormal);
        let x = id.simulate(10, &mut stream(3, &[0])).unwrap();
        let s = InnovationDist::StandardNormal.sampler().unwrap();
        let mut rng = stream(3, &[0]);
        let direct: Vec<f64> = (0..10).map(|_| s.sample(&mut rng)).collect();
        assert_eq!(x.as_flat(), &direct[..]);

        let ma = ModelSpec::ma(vec![1.0, 1.0], InnovationDist::StandardNormal);
        let x = ma.simulate(100_000, &mut stream(4, &[0])).unwrap();
        assert!((lag1_acf(x.as_flat()) - 0.5).abs() < 0.01);

        assert_eq!(
            ma_filter(&[1.0, 0.5, 0.8], &[1.0, 2.0, 3.0, 4.0]),
            vec![3.0 + 1.0 + 0.8, 4.0 + 1.5 + 1.6]
        );
    }
}
