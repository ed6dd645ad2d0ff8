//! Monte Carlo pre-asymptotic extremogram `P(X_h/a ∈ B | X_0/a ∈ A)` and its
//! on-disk cache.
//!
//! Each of `series_count` independent series of length `series_length` (plus
//! `h_max` trailing observations) is thresholded at its own estimate of `a`;
//! exceedance counts are pooled over series in index order.
//!
//! # Cache format
//!
//! One UTF-8 text file per key, named `oracle-<16 hex digits>.txt` where the
//! digits are the FNV-1a 64 hash of the canonical key string. Lines:
//!
//! ```text
//! # extremo pre-asymptotic oracle v1
//! model = garch(0.0001,0.08,0.9,student_t_unit_var:8)/burn_in=2000
//! threshold = quantile:0.05
//! pair = 1|1|1
//! h_max = 10
//! series_count = 100
//! series_length = 1000000
//! seed = 7
//! marginal_total = 5000000
//! lag 0 1 0 1 5000000
//! lag 1 0.31 0.0012 0.3098 1550000
//! ```
//!
//! Key lines are `name = value`. Each `lag` line holds `h`, the pooled ratio,
//! its standard error, the mean of per-series ratios and the pooled joint
//! count. Blank lines and lines starting with `#` are ignored. Floats use
//! Rust's shortest round-trip formatting.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extremogram::lag_counts;
use crate::models::ModelSpec;
use crate::rng::{label, stream};
use crate::sets::{Membership, OrthantSetPair};
use crate::threshold::{estimate_threshold, ThresholdSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub series_count: usize,
    pub series_length: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            series_count: 100,
            series_length: 1_000_000,
        }
    }
}

/// Everything the oracle value depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleKey {
    pub model: ModelSpec,
    pub threshold: ThresholdSpec,
    pub pair: OrthantSetPair,
    pub h_max: usize,
    pub budget: OracleBudget,
    pub seed: u64,
}

fn fmt_corner(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn pair_string(pair: &OrthantSetPair) -> String {
    format!(
        "{}|{}|{}",
        fmt_corner(pair.lower_a()),
        fmt_corner(pair.lower_b()),
        pair.scale()
    )
}

impl OracleKey {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("model", self.model.to_string()),
            ("threshold", self.threshold.to_string()),
            ("pair", pair_string(&self.pair)),
            ("h_max", self.h_max.to_string()),
            ("series_count", self.budget.series_count.to_string()),
            ("series_length", self.budget.series_length.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn canonical(&self) -> String {
        self.fields()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn file_name(&self) -> String {
        format!("oracle-{:016x}.txt", fnv1a(self.canonical().as_bytes()))
    }

    pub fn path_in(&self, dir: &Path) -> PathBuf {
        dir.join(self.file_name())
    }
}

impl fmt::Display for OracleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreasymptoticOracle {
    /// Pooled ratio of joint to marginal counts, `h = 0..=h_max`.
    pub values: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Average of per-series ratios over series with at least one exceedance.
    pub mean_of_ratios: Vec<f64>,
    pub joint_totals: Vec<u64>,
    pub marginal_total: u64,
    pub budget: OracleBudget,
}

#[derive(Debug, Clone)]
struct SeriesCounts {
    marginal: u64,
    joint: Vec<u64>,
}

/// Pre-asymptotic extremogram for several thresholds from one set of simulated series.
pub fn preasymptotic_extremograms(
    model: &ModelSpec,
    thresholds: &[ThresholdSpec],
    pair: &OrthantSetPair,
    h_max: usize,
    budget: OracleBudget,
    seed: u64,
) -> Result<Vec<PreasymptoticOracle>> {
    model.validate()?;
    if budget.series_count == 0 || budget.series_length == 0 {
        return Err(Error::invalid("oracle budget must be positive"));
    }
    for t in thresholds {
        t.validate(budget.series_length + h_max)?;
    }
    let per_series: Vec<Vec<SeriesCounts>> = (0..budget.series_count)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, &[label::ORACLE, s as u64]);
            let x = model.simulate(budget.series_length + h_max, &mut rng)?;
            thresholds
                .iter()
                .map(|&spec| {
                    let a = estimate_threshold(&x, spec)?;
                    let m = Membership::compute(&x, a, pair)?;
                    let (marginal, joint) = lag_counts(&m, budget.series_length, h_max);
                    Ok(SeriesCounts {
                        marginal: marginal as u64,
                        joint: joint.into_iter().map(|j| j as u64).collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    thresholds
        .iter()
        .enumerate()
        .map(|(t, spec)| {
            let counts: Vec<&SeriesCounts> = per_series.iter().map(|c| &c[t]).collect();
            combine(&counts, h_max, budget).ok_or_else(|| {
                Error::OracleUndefined(format!(
                    "model {model}, threshold {spec}, {} x {}",
                    budget.series_count, budget.series_length
                ))
            })
        })
        .collect()
}

pub fn preasymptotic_extremogram(
    model: &ModelSpec,
    threshold: ThresholdSpec,
    pair: &OrthantSetPair,
    h_max: usize,
    budget: OracleBudget,
    seed: u64,
) -> Result<PreasymptoticOracle> {
    Ok(preasymptotic_extremograms(model, &[threshold], pair, h_max, budget, seed)?.remove(0))
}

fn combine(
    counts: &[&SeriesCounts],
    h_max: usize,
    budget: OracleBudget,
) -> Option<PreasymptoticOracle> {
    let marginal_total: u64 = counts.iter().map(|c| c.marginal).sum();
    if marginal_total == 0 {
        return None;
    }
    let s = counts.len() as f64;
    let mean_marginal = marginal_total as f64 / s;
    let mut values = Vec::with_capacity(h_max + 1);
    let mut standard_errors = Vec::with_capacity(h_max + 1);
    let mut mean_of_ratios = Vec::with_capacity(h_max + 1);
    let mut joint_totals = Vec::with_capacity(h_max + 1);
    for h in 0..=h_max {
        let joint: u64 = counts.iter().map(|c| c.joint[h]).sum();
        let ratio = joint as f64 / marginal_total as f64;
        let se = if counts.len() > 1 {
            let ss: f64 = counts
                .iter()
                .map(|c| (c.joint[h] as f64 - ratio * c.marginal as f64).powi(2))
                .sum();
            (ss / (s * (s - 1.0))).sqrt() / mean_marginal
        } else {
            (ratio * (1.0 - ratio) / marginal_total as f64).sqrt()
        };
        let defined: Vec<f64> = counts
            .iter()
            .filter(|c| c.marginal > 0)
            .map(|c| c.joint[h] as f64 / c.marginal as f64)
            .collect();
        values.push(ratio);
        standard_errors.push(se);
        mean_of_ratios.push(defined.iter().sum::<f64>() / defined.len() as f64);
        joint_totals.push(joint);
    }
    Some(PreasymptoticOracle {
        values,
        standard_errors,
        mean_of_ratios,
        joint_totals,
        marginal_total,
        budget,
    })
}

/// Serializes an oracle entry in the cache format.
pub fn render_entry(key: &OracleKey, oracle: &PreasymptoticOracle) -> String {
    let mut out = String::from("# extremo pre-asymptotic oracle v1\n");
    for (k, v) in key.fields() {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out.push_str(&format!("marginal_total = {}\n", oracle.marginal_total));
    for h in 0..oracle.values.len() {
        out.push_str(&format!(
            "lag {h} {} {} {} {}\n",
            oracle.values[h],
            oracle.standard_errors[h],
            oracle.mean_of_ratios[h],
            oracle.joint_totals[h]
        ));
    }
    out
}

/// Parses a cache entry, checking that it was produced for `key`.
pub fn parse_entry(text: &str, key: &OracleKey) -> Result<PreasymptoticOracle> {
    let mut fields = BTreeMap::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        if let Some(rest) = line.strip_prefix("lag ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 5 {
                return Err(parse_err(format!(
                    "lag line needs 5 fields, found {}",
                    parts.len()
                )));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(format!("bad number `{s}`")))
            };
            let h: usize = parts[0].parse().map_err(|_| parse_err("bad lag".into()))?;
            let joint: u64 = parts[4]
                .parse()
                .map_err(|_| parse_err("bad joint count".into()))?;
            rows.push((h, num(parts[1])?, num(parts[2])?, num(parts[3])?, joint));
        } else if let Some((k, v)) = line.split_once('=') {
            fields.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            return Err(parse_err(format!("unrecognized line `{line}`")));
        }
    }
    for (k, v) in key.fields() {
        match fields.get(k) {
            Some(found) if *found == v => {}
            Some(found) => {
                return Err(Error::invalid(format!(
                    "oracle cache mismatch on `{k}`: file has `{found}`, expected `{v}`"
                )))
            }
            None => return Err(Error::invalid(format!("oracle cache missing `{k}`"))),
        }
    }
    let marginal_total = fields
        .get("marginal_total")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::invalid("oracle cache missing marginal_total"))?;
    if rows.len() != key.h_max + 1 || rows.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(Error::invalid(format!(
            "oracle cache must list lags 0..={} in order",
            key.h_max
        )));
    }
    Ok(PreasymptoticOracle {
        values: rows.iter().map(|r| r.1).collect(),
        standard_errors: rows.iter().map(|r| r.2).collect(),
        mean_of_ratios: rows.iter().map(|r| r.3).collect(),
        joint_totals: rows.iter().map(|r| r.4).collect(),
        marginal_total,
        budget: key.budget,
    })
}

/// Directory of cached oracle entries.
#[derive(Debug, Clone)]
pub struct OracleCache {
    dir: PathBuf,
}

impl OracleCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn load(&self, key: &OracleKey) -> Result<Option<PreasymptoticOracle>> {
        let path = key.path_in(&self.dir);
        match std::fs::read_to_string(&path) {
            Ok(text) => parse_entry(&text, key).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn require(&self, key: &OracleKey) -> Result<PreasymptoticOracle> {
        self.load(key)?.ok_or_else(|| Error::MissingOracle {
            key: key.canonical(),
            path: key.path_in(&self.dir),
        })
    }

    pub fn store(&self, key: &OracleKey, oracle: &PreasymptoticOracle) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = key.path_in(&self.dir);
        std::fs::write(&path, render_entry(key, oracle)).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Loads every key, simulating (in one shared pass) and storing those that are missing.
    /// All keys must share model, pair, h_max, budget and seed.
    pub fn load_or_build(&self, keys: &[OracleKey]) -> Result<Vec<PreasymptoticOracle>> {
        let mut out: Vec<Option<PreasymptoticOracle>> =
            keys.iter().map(|k| self.load(k)).collect::<Result<_>>()?;
        let missing: Vec<usize> = (0..keys.len()).filter(|&i| out[i].is_none()).collect();
        if let Some(&first) = missing.first() {
            let k0 = &keys[first];
            if missing.iter().any(|&i| {
                let k = &keys[i];
                k.model != k0.model
                    || k.pair != k0.pair
                    || k.h_max != k0.h_max
                    || k.budget != k0.budget
                    || k.seed != k0.seed
            }) {
                return Err(Error::invalid(
                    "oracle keys built together must differ only in threshold",
                ));
            }
            let specs: Vec<ThresholdSpec> = missing.iter().map(|&i| keys[i].threshold).collect();
            log::info!(
                "building oracle for {} ({} series x {})",
                k0.model,
                k0.budget.series_count,
                k0.budget.series_length
            );
            let built = preasymptotic_extremograms(
                &k0.model, &specs, &k0.pair, k0.h_max, k0.budget, k0.seed,
            )?;
            for (&i, oracle) in missing.iter().zip(built) {
                self.store(&keys[i], &oracle)?;
                out[i] = Some(oracle);
            }
        }
        Ok(out.into_iter().map(|o| o.expect("filled")).collect())
    }
}
