//! Monte Carlo coverage of bootstrap confidence intervals.
//!
//! Repetition `k` simulates its series from stream `(seed, [REPETITION, k,
//! SERIES])` and draws replicate `b` of a scheme from `(seed, [REPETITION, k,
//! scheme, b])`. One draw (multipliers or stationary blocks) serves every
//! threshold of the repetition. Per-repetition outcomes are folded in
//! repetition order, so the table is independent of the thread count.

use rayon::prelude::*;

use crate::bootstrap::{
    bootstrap_quantiles, ci_direct, ci_transfer, dmc_row, modified_row, BlockCounts, BlockDraw,
    CiMethod, ConfidenceInterval, Scheme,
};
use crate::error::{Error, Result};
use crate::extremogram::{lag_counts, linear_process_extremogram};
use crate::models::{sample_multipliers, InnovationDist};
use crate::oracle::OracleCache;
use crate::rng::{label, stream};
use crate::series::TimeSeries;
use crate::sets::{Membership, OrthantSetPair};
use crate::threshold::{estimate_threshold, ThresholdSpec};

use super::config::{ExperimentConfig, Truth};

/// Aggregated outcome for one `(scheme, method, p, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCell {
    pub scheme: Scheme,
    pub method: CiMethod,
    /// Exceedance probability of the estimate being covered (`p1` for transfer).
    pub p: f64,
    pub h: usize,
    pub sim_count: usize,
    pub covered: usize,
    /// Base estimate undefined (no marginal exceedance); scored as not covering.
    pub undefined_base: usize,
    /// Base defined but every replicate undefined; scored as not covering.
    pub no_interval: usize,
    /// Repetitions whose base estimate is defined and nonzero.
    pub nonzero_base: usize,
    pub covered_nonzero: usize,
    pub width_sum: f64,
    pub width_count: usize,
}

impl CoverageCell {
    fn new(scheme: Scheme, method: CiMethod, p: f64, h: usize) -> Self {
        Self {
            scheme,
            method,
            p,
            h,
            sim_count: 0,
            covered: 0,
            undefined_base: 0,
            no_interval: 0,
            nonzero_base: 0,
            covered_nonzero: 0,
            width_sum: 0.0,
            width_count: 0,
        }
    }

    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.sim_count as f64
    }

    /// `sqrt(c (1 - c) / sim_count)`.
    pub fn standard_error(&self) -> f64 {
        let c = self.coverage();
        (c * (1.0 - c) / self.sim_count as f64).sqrt()
    }

    /// Repetitions with a defined base estimate that missed the truth.
    pub fn not_covered(&self) -> usize {
        self.sim_count - self.covered - self.undefined_base
    }

    /// Coverage among repetitions with a nonzero base estimate.
    pub fn conditional_coverage(&self) -> Option<f64> {
        (self.nonzero_base > 0).then(|| self.covered_nonzero as f64 / self.nonzero_base as f64)
    }

    pub fn mean_width(&self) -> Option<f64> {
        (self.width_count > 0).then(|| self.width_sum / self.width_count as f64)
    }

    fn record(&mut self, outcome: &Outcome) {
        self.sim_count += 1;
        match outcome {
            Outcome::UndefinedBase => self.undefined_base += 1,
            Outcome::NoInterval { nonzero } => {
                self.no_interval += 1;
                self.nonzero_base += usize::from(*nonzero);
            }
            Outcome::Interval {
                covered,
                nonzero,
                width,
            } => {
                self.covered += usize::from(*covered);
                self.nonzero_base += usize::from(*nonzero);
                self.covered_nonzero += usize::from(*covered && *nonzero);
                self.width_sum += width;
                self.width_count += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    pub level: f64,
    pub sim_count: usize,
    pub cells: Vec<CoverageCell>,
}

impl CoverageTable {
    pub fn cell(
        &self,
        scheme: Scheme,
        method: CiMethod,
        p: f64,
        h: usize,
    ) -> Option<&CoverageCell> {
        self.cells
            .iter()
            .find(|c| c.scheme == scheme && c.method == method && c.p == p && c.h == h)
    }

    /// Cells of one `(scheme, method, p)` ordered by lag.
    pub fn series(&self, scheme: Scheme, method: CiMethod, p: f64) -> Vec<&CoverageCell> {
        let mut out: Vec<&CoverageCell> = self
            .cells
            .iter()
            .filter(|c| c.scheme == scheme && c.method == method && c.p == p)
            .collect();
        out.sort_by_key(|c| c.h);
        out
    }

    /// Coverage averaged over the given lags.
    pub fn average_coverage(
        &self,
        scheme: Scheme,
        method: CiMethod,
        p: f64,
        lags: impl IntoIterator<Item = usize>,
    ) -> Option<f64> {
        let vals: Option<Vec<f64>> = lags
            .into_iter()
            .map(|h| self.cell(scheme, method, p, h).map(CoverageCell::coverage))
            .collect();
        let vals = vals?;
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    pub fn schemes(&self) -> Vec<Scheme> {
        let mut s: Vec<Scheme> = self.cells.iter().map(|c| c.scheme).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Distinct `(method, p)` panels in first-appearance order.
    pub fn panels(&self) -> Vec<(CiMethod, f64)> {
        let mut out: Vec<(CiMethod, f64)> = Vec::new();
        for c in &self.cells {
            if !out.iter().any(|(m, p)| *m == c.method && *p == c.p) {
                out.push((c.method, c.p));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    UndefinedBase,
    NoInterval {
        nonzero: bool,
    },
    Interval {
        covered: bool,
        nonzero: bool,
        width: f64,
    },
}

/// Target values `ρ(1..=h_max)` for every threshold in `ps`, index `h` (0 unused).
pub fn resolve_truth(
    config: &ExperimentConfig,
    cache: Option<&OracleCache>,
) -> Result<Vec<Vec<f64>>> {
    let ps = config.all_thresholds();
    match config.truth {
        Truth::Analytic => {
            let psi = config
                .model
                .linear_coefficients()
                .ok_or_else(|| Error::config("truth", "analytic truth needs a linear model"))?;
            let InnovationDist::SymmetrizedFrechet { alpha } = config.model.innovation() else {
                return Err(Error::config(
                    "truth",
                    "analytic truth requires Frechet innovations",
                ));
            };
            let rho = linear_process_extremogram(&psi, alpha, config.h_max)?;
            Ok(vec![rho; ps.len()])
        }
        Truth::Oracle => {
            let cache = cache.ok_or_else(|| {
                Error::config("oracle_dir", "oracle truth needs a cache directory")
            })?;
            ps.iter()
                .map(|&p| cache.require(&config.oracle_key(p)).map(|o| o.values))
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct CellSpec {
    scheme_idx: usize,
    method: CiMethod,
    /// Index of the covered threshold in `all_thresholds`.
    target: usize,
    /// Index of the threshold whose bootstrap supplies quantiles.
    source: usize,
    h: usize,
}

fn cell_specs(config: &ExperimentConfig, ps: &[f64]) -> Vec<CellSpec> {
    let idx = |p: f64| ps.iter().position(|&q| q == p).expect("threshold present");
    let mut out = Vec::new();
    for (scheme_idx, _) in config.schemes.iter().enumerate() {
        for &method in &config.ci_methods {
            let pairs: Vec<(usize, usize)> = match method {
                CiMethod::Direct => config
                    .thresholds
                    .iter()
                    .map(|&p| (idx(p), idx(p)))
                    .collect(),
                CiMethod::Transfer { p1, p2 } => vec![(idx(p1), idx(p2))],
            };
            for (target, source) in pairs {
                for h in 1..=config.h_max {
                    out.push(CellSpec {
                        scheme_idx,
                        method,
                        target,
                        source,
                        h,
                    });
                }
            }
        }
    }
    out
}

struct Repetition {
    base: Vec<Vec<Option<f64>>>,
    /// `replicates[scheme][threshold][h]` holds the column over `b`.
    replicates: Vec<Vec<Vec<Vec<Option<f64>>>>>,
}

fn run_repetition(config: &ExperimentConfig, ps: &[f64], k: usize) -> Result<Repetition> {
    let h_max = config.h_max;
    let n = config.n;
    let pair = OrthantSetPair::tail(1);
    let mut rng = stream(config.seed, &[label::REPETITION, k as u64, label::SERIES]);
    let x: TimeSeries = config.model.simulate(n + h_max, &mut rng)?;

    let mut memberships = Vec::with_capacity(ps.len());
    let mut base = Vec::with_capacity(ps.len());
    for &p in ps {
        let a = estimate_threshold(&x, ThresholdSpec::EmpiricalQuantile(p))?;
        let m = Membership::compute(&x, a, &pair)?;
        let (marginal, joint) = lag_counts(&m, n, h_max);
        base.push(
            joint
                .iter()
                .map(|&j| (marginal > 0).then(|| j as f64 / marginal as f64))
                .collect(),
        );
        memberships.push(m);
    }

    let b_count = config.replicates;
    let r = config.block_length;
    let mut replicates = Vec::with_capacity(config.schemes.len());
    for &scheme in &config.schemes {
        let mut cols = vec![vec![Vec::with_capacity(b_count); h_max + 1]; ps.len()];
        let counts: Vec<BlockCounts> = if scheme == Scheme::Multiplier {
            memberships
                .iter()
                .map(|m| BlockCounts::new(m, n, h_max, r))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        for b in 0..b_count {
            let mut rng = stream(
                config.seed,
                &[label::REPETITION, k as u64, scheme.stream_label(), b as u64],
            );
            let rows: Vec<Vec<Option<f64>>> = match scheme {
                Scheme::Multiplier => {
                    let xi =
                        sample_multipliers(config.multiplier, counts[0].block_count(), &mut rng)?;
                    counts
                        .iter()
                        .map(|c| c.replicate(&xi))
                        .collect::<Result<_>>()?
                }
                Scheme::StationaryDmc => {
                    let draw = BlockDraw::draw(n + h_max, r as f64, &mut rng)?;
                    let idx = draw.indices(config.wrap);
                    memberships
                        .iter()
                        .map(|m| dmc_row(m, &idx, h_max))
                        .collect()
                }
                Scheme::StationaryModified => {
                    let draw = BlockDraw::draw(n, r as f64, &mut rng)?;
                    memberships
                        .iter()
                        .map(|m| modified_row(m, &draw, h_max, config.wrap))
                        .collect()
                }
            };
            for (t, row) in rows.into_iter().enumerate() {
                for (h, v) in row.into_iter().enumerate() {
                    cols[t][h].push(v);
                }
            }
        }
        replicates.push(cols);
    }
    Ok(Repetition { base, replicates })
}

fn score(
    config: &ExperimentConfig,
    ps: &[f64],
    truth: &[Vec<f64>],
    rep: &Repetition,
    spec: &CellSpec,
) -> Result<Outcome> {
    let h = spec.h;
    let (Some(b_target), Some(b_source)) = (rep.base[spec.target][h], rep.base[spec.source][h])
    else {
        return Ok(Outcome::UndefinedBase);
    };
    let nonzero = b_target != 0.0;
    let column = &rep.replicates[spec.scheme_idx][spec.source][h];
    let q = match bootstrap_quantiles(column, config.alpha()) {
        Ok(q) => q,
        Err(Error::NoInterval) => return Ok(Outcome::NoInterval { nonzero }),
        Err(e) => return Err(e),
    };
    let ci: ConfidenceInterval = match spec.method {
        CiMethod::Direct => ci_direct(b_target, &q, config.level),
        CiMethod::Transfer { .. } => ci_transfer(
            b_target,
            b_source,
            &q,
            ps[spec.target],
            ps[spec.source],
            config.level,
        )?,
    };
    Ok(Outcome::Interval {
        covered: ci.contains(truth[spec.target][h]),
        nonzero,
        width: ci.width(),
    })
}

/// Runs the experiment on the current rayon pool.
pub fn run_coverage_experiment(
    config: &ExperimentConfig,
    cache: Option<&OracleCache>,
) -> Result<CoverageTable> {
    config.validate()?;
    for w in config.warnings() {
        log::warn!("{w}");
    }
    let ps = config.all_thresholds();
    let truth = resolve_truth(config, cache)?;
    let specs = cell_specs(config, &ps);

    let outcomes: Vec<Vec<Outcome>> = (0..config.sim_count)
        .into_par_iter()
        .map(|k| {
            let rep = run_repetition(config, &ps, k)?;
            specs
                .iter()
                .map(|s| score(config, &ps, &truth, &rep, s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut cells: Vec<CoverageCell> = specs
        .iter()
        .map(|s| CoverageCell::new(config.schemes[s.scheme_idx], s.method, ps[s.target], s.h))
        .collect();
    for rep in &outcomes {
        for (cell, outcome) in cells.iter_mut().zip(rep) {
            cell.record(outcome);
        }
    }
    Ok(CoverageTable {
        level: config.level,
        sim_count: config.sim_count,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpec;

    fn iid_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ModelSpec::ar1(
            0.0,
            InnovationDist::SymmetrizedFrechet { alpha: 3.0 },
        ));
        cfg.n = 400;
        cfg.sim_count = 30;
        cfg.replicates = 50;
        cfg.block_length = 20;
        cfg.thresholds = vec![0.05];
        cfg.h_max = 3;
        cfg.truth = Truth::Analytic;
        cfg.seed = 5;
        cfg
    }

    #[test]
    fn smoke_single_repetition() {
        let mut cfg = iid_config();
        cfg.sim_count = 1;
        cfg.replicates = 2;
        cfg.n = 60;
        cfg.block_length = 10;
        let t = run_coverage_experiment(&cfg, None).unwrap();
        assert_eq!(t.cells.len(), 3 * 3);
        for c in &t.cells {
            assert!(c.coverage() == 0.0 || c.coverage() == 1.0);
        }
    }

    #[test]
    fn accounting_identity_and_zero_truth() {
        let t = run_coverage_experiment(&iid_config(), None).unwrap();
        for c in &t.cells {
            assert_eq!(c.covered + c.not_covered() + c.undefined_base, c.sim_count);
            assert!(c.covered_nonzero <= c.nonzero_base);
            assert!((0.0..=1.0).contains(&c.coverage()));
        }
    }

    /// With truth 0 an interval covers iff its clipped lower end is 0.
    #[test]
    fn zero_truth_coverage_is_lower_bound_at_zero() {
        let cfg = iid_config();
        let t = run_coverage_experiment(&cfg, None).unwrap();
        let ps = cfg.all_thresholds();
        let specs = cell_specs(&cfg, &ps);
        let mut at_zero = vec![0usize; specs.len()];
        for k in 0..cfg.sim_count {
            let rep = run_repetition(&cfg, &ps, k).unwrap();
            for (i, s) in specs.iter().enumerate() {
                let Some(base) = rep.base[s.target][s.h] else {
                    continue;
                };
                let Ok(q) =
                    bootstrap_quantiles(&rep.replicates[s.scheme_idx][s.source][s.h], cfg.alpha())
                else {
                    continue;
                };
                if ci_direct(base, &q, cfg.level).lower == 0.0 {
                    at_zero[i] += 1;
                }
            }
        }
        for (cell, expect) in t.cells.iter().zip(at_zero) {
            assert_eq!(cell.covered, expect, "{cell:?}");
        }
    }

    #[test]
    fn transfer_with_equal_thresholds_matches_direct() {
        let mut cfg = iid_config();
        cfg.ci_methods = vec![CiMethod::Direct, CiMethod::Transfer { p1: 0.05, p2: 0.05 }];
        let t = run_coverage_experiment(&cfg, None).unwrap();
        for scheme in Scheme::ALL {
            for h in 1..=cfg.h_max {
                let d = t.cell(scheme, CiMethod::Direct, 0.05, h).unwrap();
                let tr = t
                    .cell(scheme, CiMethod::Transfer { p1: 0.05, p2: 0.05 }, 0.05, h)
                    .unwrap();
                assert_eq!(d.covered, tr.covered);
                assert_eq!(d.width_sum.to_bits(), tr.width_sum.to_bits());
            }
        }
    }

    #[test]
    fn missing_oracle_names_key() {
        let mut cfg = iid_config();
        cfg.truth = Truth::Oracle;
        let dir = tempfile::tempdir().unwrap();
        let err = run_coverage_experiment(&cfg, Some(&OracleCache::new(dir.path()))).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("quantile:0.05") && msg.contains("extremo oracle"),
            "{msg}"
        );
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = iid_config();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_coverage_experiment(&cfg, None))
                .unwrap()
        };
        assert_eq!(run(1), run(4));
    }
}
