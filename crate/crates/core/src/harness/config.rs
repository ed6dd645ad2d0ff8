//! Experiment configuration files.
//!
//! # Grammar
//!
//! ```text
//! file    := { line '\n' }
//! line    := blank | comment | entry
//! comment := ws '#' any*
//! entry   := ws key ws '=' ws value ws [ comment ]
//! key     := [a-z0-9_]+
//! value   := any character except '#', trimmed
//! ```
//!
//! Each key may appear once. Lists are comma separated. Keys:
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `model` | `garch`, `ar1` or `ma` | required |
//! | `alpha0`, `alpha1`, `beta1` | GARCH parameters | `0.0001`, `0.08`, `0.9` |
//! | `phi` | AR(1) coefficient | `0.8` |
//! | `coefficients` | MA coefficients `ψ_0, ..., ψ_q` | `1, 0.5, 0.8` |
//! | `innovation` | `student_t:<ν>`, `student_t_unit_var:<ν>`, `frechet:<α>`, `normal` | `student_t_unit_var:8` (GARCH), `frechet:3` (linear) |
//! | `burn_in` | discarded leading steps | 2000 (GARCH), 1000 (AR), 0 (MA) |
//! | `n` | effective sample size | `2000` |
//! | `sim_count` | Monte Carlo repetitions | `500` |
//! | `replicates` | bootstrap replicates `B` per repetition | `200` |
//! | `block_length` | block length `r` | `100` |
//! | `thresholds` | exceedance probabilities `p` | `0.05` |
//! | `h_max` | largest lag | `10` |
//! | `schemes` | subset of `multiplier`, `dmc`, `modified` | `multiplier, dmc, modified` |
//! | `ci_methods` | `direct` and/or `transfer:<p1>:<p2>` | `direct` |
//! | `level` | nominal coverage `1 - α` | `0.95` |
//! | `truth` | `oracle` or `analytic` | `oracle` |
//! | `seed` | master seed | `0` |
//! | `multiplier` | `student_t:<ν>` (unit variance) or `normal` | `student_t:5` |
//! | `wrap` | `shifted` or `circular` | `shifted` |
//! | `oracle_series`, `oracle_length` | oracle budget | `100`, `1000000` |
//! | `oracle_seed` | oracle seed | `1` |
//! | `oracle_dir` | cache directory | unset |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bootstrap::{CiMethod, Scheme, Wrap};
use crate::error::{Error, Result};
use crate::models::{InnovationDist, Model, ModelSpec, MultiplierDist};
use crate::oracle::{OracleBudget, OracleKey};
use crate::sets::OrthantSetPair;
use crate::threshold::ThresholdSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    /// Pre-asymptotic extremogram from the oracle cache.
    Oracle,
    /// Limit extremogram of a linear model.
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub sim_count: usize,
    pub replicates: usize,
    pub block_length: usize,
    pub thresholds: Vec<f64>,
    pub h_max: usize,
    pub schemes: Vec<Scheme>,
    pub ci_methods: Vec<CiMethod>,
    pub level: f64,
    pub truth: Truth,
    pub seed: u64,
    pub multiplier: MultiplierDist,
    pub wrap: Wrap,
    pub oracle_budget: OracleBudget,
    pub oracle_seed: u64,
    pub oracle_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Desk-scale defaults around `model`.
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            n: 2000,
            sim_count: 500,
            replicates: 200,
            block_length: 100,
            thresholds: vec![0.05],
            h_max: 10,
            schemes: Scheme::ALL.to_vec(),
            ci_methods: vec![CiMethod::Direct],
            level: 0.95,
            truth: Truth::Oracle,
            seed: 0,
            multiplier: MultiplierDist::default(),
            wrap: Wrap::Shifted,
            oracle_budget: OracleBudget::default(),
            oracle_seed: 1,
            oracle_dir: None,
        }
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.level
    }

    pub fn validate(&self) -> Result<()> {
        self.model
            .validate()
            .map_err(|e| Error::config("model", e.to_string()))?;
        if self.n < 2 {
            return Err(Error::config("n", "must be at least 2"));
        }
        if self.sim_count < 1 {
            return Err(Error::config("sim_count", "must be at least 1"));
        }
        if self.replicates < 2 {
            return Err(Error::config("replicates", "must be at least 2"));
        }
        if self.block_length < 1 || self.block_length > self.n {
            return Err(Error::config(
                "block_length",
                format!("must lie in 1..={}", self.n),
            ));
        }
        if self.h_max < 1 {
            return Err(Error::config("h_max", "must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::config("level", "must lie in (0, 1)"));
        }
        if self.thresholds.is_empty() && self.ci_methods.iter().all(|m| *m == CiMethod::Direct) {
            return Err(Error::config(
                "thresholds",
                "at least one threshold is required",
            ));
        }
        if let Some(p) = self.thresholds.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::config("thresholds", format!("{p} outside (0, 1)")));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one scheme is required"));
        }
        if self.ci_methods.is_empty() {
            return Err(Error::config(
                "ci_methods",
                "at least one method is required",
            ));
        }
        for m in &self.ci_methods {
            if let CiMethod::Transfer { p1, p2 } = *m {
                if !(p1 > 0.0 && p1 <= p2 && p2 < 1.0) {
                    return Err(Error::config(
                        "ci_methods",
                        format!("transfer needs 0 < p1 <= p2 < 1, got {p1}, {p2}"),
                    ));
                }
            }
        }
        if self.truth == Truth::Analytic && self.model.linear_coefficients().is_none() {
            return Err(Error::config(
                "truth",
                "analytic truth is only available for linear models",
            ));
        }
        if self.truth == Truth::Analytic
            && !matches!(
                self.model.innovation(),
                InnovationDist::SymmetrizedFrechet { .. }
            )
        {
            return Err(Error::config(
                "truth",
                "analytic truth requires Frechet innovations",
            ));
        }
        self.multiplier
            .sampler()
            .map_err(|e| Error::config("multiplier", e.to_string()))?;
        if self.oracle_budget.series_count == 0 || self.oracle_budget.series_length == 0 {
            return Err(Error::config(
                "oracle_series",
                "oracle budget must be positive",
            ));
        }
        Ok(())
    }

    /// Every exceedance probability the experiment estimates at, ascending.
    pub fn all_thresholds(&self) -> Vec<f64> {
        let mut ps = self.thresholds.clone();
        for m in &self.ci_methods {
            if let CiMethod::Transfer { p1, p2 } = *m {
                ps.push(p1);
                ps.push(p2);
            }
        }
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        ps
    }

    pub fn oracle_key(&self, p: f64) -> OracleKey {
        OracleKey {
            model: self.model.clone(),
            threshold: ThresholdSpec::EmpiricalQuantile(p),
            pair: OrthantSetPair::tail(1),
            h_max: self.h_max,
            budget: self.oracle_budget,
            seed: self.oracle_seed,
        }
    }

    /// Advisory checks on block settings; never fatal.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = self.model.warnings();
        let n = self.n as f64;
        for &p in &self.all_thresholds() {
            let scale = (n * p * n).sqrt() / 2.0;
            if self.block_length as f64 > scale {
                out.push(format!(
                    "block_length {} exceeds sqrt(n*p*n)/2 = {scale:.1} at p = {p}",
                    self.block_length
                ));
            }
            if n * p < 10.0 {
                out.push(format!(
                    "only about {:.1} exceedances expected at p = {p}",
                    n * p
                ));
            }
        }
        if self.block_length > self.n / 2 {
            out.push(format!(
                "block_length {} leaves fewer than two blocks",
                self.block_length
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let mut e = Entries(entries);
        let model = model_from(&mut e)?;
        let mut cfg = ExperimentConfig::new(model);
        if let Some(v) = e.take("n") {
            cfg.n = parse_num("n", &v)?;
        }
        if let Some(v) = e.take("sim_count") {
            cfg.sim_count = parse_num("sim_count", &v)?;
        }
        if let Some(v) = e.take("replicates") {
            cfg.replicates = parse_num("replicates", &v)?;
        }
        if let Some(v) = e.take("block_length") {
            cfg.block_length = parse_num("block_length", &v)?;
        }
        if let Some(v) = e.take("thresholds") {
            cfg.thresholds = parse_list("thresholds", &v)?;
        }
        if let Some(v) = e.take("h_max") {
            cfg.h_max = parse_num("h_max", &v)?;
        }
        if let Some(v) = e.take("schemes") {
            cfg.schemes = split_list(&v)
                .map(|s| {
                    s.parse()
                        .map_err(|err: Error| Error::config("schemes", err.to_string()))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = e.take("ci_methods") {
            cfg.ci_methods = split_list(&v).map(parse_method).collect::<Result<_>>()?;
        }
        if let Some(v) = e.take("level") {
            cfg.level = parse_num("level", &v)?;
        }
        if let Some(v) = e.take("truth") {
            cfg.truth = match v.as_str() {
                "oracle" => Truth::Oracle,
                "analytic" => Truth::Analytic,
                other => {
                    return Err(Error::config(
                        "truth",
                        format!("expected oracle or analytic, got `{other}`"),
                    ))
                }
            };
        }
        if let Some(v) = e.take("seed") {
            cfg.seed = parse_num("seed", &v)?;
        }
        if let Some(v) = e.take("multiplier") {
            cfg.multiplier = match v.split_once(':') {
                Some(("student_t", nu)) => MultiplierDist::ScaledStudentT {
                    nu: parse_num("multiplier", nu)?,
                },
                None if v == "normal" => MultiplierDist::StandardNormal,
                _ => {
                    return Err(Error::config(
                        "multiplier",
                        format!("expected student_t:<nu> or normal, got `{v}`"),
                    ))
                }
            };
        }
        if let Some(v) = e.take("wrap") {
            cfg.wrap = match v.as_str() {
                "shifted" => Wrap::Shifted,
                "circular" => Wrap::Circular,
                other => {
                    return Err(Error::config(
                        "wrap",
                        format!("expected shifted or circular, got `{other}`"),
                    ))
                }
            };
        }
        if let Some(v) = e.take("oracle_series") {
            cfg.oracle_budget.series_count = parse_num("oracle_series", &v)?;
        }
        if let Some(v) = e.take("oracle_length") {
            cfg.oracle_budget.series_length = parse_num("oracle_length", &v)?;
        }
        if let Some(v) = e.take("oracle_seed") {
            cfg.oracle_seed = parse_num("oracle_seed", &v)?;
        }
        if let Some(v) = e.take("oracle_dir") {
            cfg.oracle_dir = Some(PathBuf::from(v));
        }
        if let Some((key, _)) = e.0.into_iter().next() {
            return Err(Error::config(key, "unknown key"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let key = k.trim();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("invalid key `{key}`"),
            });
        }
        if out.insert(key.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::config(
                key,
                format!("duplicate key on line {}", i + 1),
            ));
        }
    }
    Ok(out)
}

fn parse_num<T: FromStr>(field: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{}`", v.trim())))
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list(field: &str, v: &str) -> Result<Vec<f64>> {
    split_list(v).map(|s| parse_num(field, s)).collect()
}

pub(crate) fn parse_method(s: &str) -> Result<CiMethod> {
    if s == "direct" {
        return Ok(CiMethod::Direct);
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["transfer", p1, p2] => Ok(CiMethod::Transfer {
            p1: parse_num("ci_methods", p1)?,
            p2: parse_num("ci_methods", p2)?,
        }),
        _ => Err(Error::config(
            "ci_methods",
            format!("expected direct or transfer:<p1>:<p2>, got `{s}`"),
        )),
    }
}

pub fn parse_innovation(v: &str) -> Result<InnovationDist> {
    let err = || {
        Error::config(
            "innovation",
            format!("expected student_t:<nu>, student_t_unit_var:<nu>, frechet:<alpha> or normal, got `{v}`"),
        )
    };
    let dist = match v.split_once(':') {
        Some(("student_t", nu)) => InnovationDist::StudentT {
            nu: parse_num("innovation", nu)?,
            unit_variance: false,
        },
        Some(("student_t_unit_var", nu)) => InnovationDist::StudentT {
            nu: parse_num("innovation", nu)?,
            unit_variance: true,
        },
        Some(("frechet", a)) => InnovationDist::SymmetrizedFrechet {
            alpha: parse_num("innovation", a)?,
        },
        None if v == "normal" => InnovationDist::StandardNormal,
        _ => return Err(err()),
    };
    dist.validate()
        .map_err(|e| Error::config("innovation", e.to_string()))?;
    Ok(dist)
}

fn model_from(e: &mut Entries) -> Result<ModelSpec> {
    let kind = e
        .take("model")
        .ok_or_else(|| Error::config("model", "missing required key"))?;
    let innovation = e
        .take("innovation")
        .map(|v| parse_innovation(&v))
        .transpose()?;
    let mut spec = match kind.as_str() {
        "garch" => {
            let base = ModelSpec::reference_garch();
            let Model::Garch {
                mut alpha0,
                mut alpha1,
                mut beta1,
                innovation: default_innov,
            } = base.model
            else {
                unreachable!()
            };
            if let Some(v) = e.take("alpha0") {
                alpha0 = parse_num("alpha0", &v)?;
            }
            if let Some(v) = e.take("alpha1") {
                alpha1 = parse_num("alpha1", &v)?;
            }
            if let Some(v) = e.take("beta1") {
                beta1 = parse_num("beta1", &v)?;
            }
            ModelSpec::garch(alpha0, alpha1, beta1, innovation.unwrap_or(default_innov))
        }
        "ar1" => {
            let phi = match e.take("phi") {
                Some(v) => parse_num("phi", &v)?,
                None => 0.8,
            };
            ModelSpec::ar1(
                phi,
                innovation.unwrap_or(InnovationDist::SymmetrizedFrechet { alpha: 3.0 }),
            )
        }
        "ma" => {
            let coefficients = match e.take("coefficients") {
                Some(v) => parse_list("coefficients", &v)?,
                None => vec![1.0, 0.5, 0.8],
            };
            ModelSpec::ma(
                coefficients,
                innovation.unwrap_or(InnovationDist::SymmetrizedFrechet { alpha: 3.0 }),
            )
        }
        other => {
            return Err(Error::config(
                "model",
                format!("expected garch, ar1 or ma, got `{other}`"),
            ))
        }
    };
    if let Some(v) = e.take("burn_in") {
        spec.burn_in = parse_num("burn_in", &v)?;
    }
    spec.validate()
        .map_err(|err| Error::config("model", err.to_string()))?;
    Ok(spec)
}
