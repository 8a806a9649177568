//! Run configuration: built-in defaults, then a flat `key = value` file, then command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sparse_uot::{CostKind, KernelFamily};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bandwidth {
    Fixed(f64),
    Median,
}

impl FromStr for Bandwidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("median") {
            return Ok(Bandwidth::Median);
        }
        let v: f64 = s.parse().map_err(|_| format!("expected a number or 'median', got '{s}'"))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("bandwidth must be positive, got {v}"));
        }
        Ok(Bandwidth::Fixed(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Classical,
    Omp,
    StochasticOmp,
    MatroidOmp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Classical => "classical",
            Algorithm::Omp => "omp",
            Algorithm::StochasticOmp => "stochastic-omp",
            Algorithm::MatroidOmp => "matroid-omp",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "classical" => Ok(Algorithm::Classical),
            "omp" => Ok(Algorithm::Omp),
            "stochastic-omp" => Ok(Algorithm::StochasticOmp),
            "matroid-omp" => Ok(Algorithm::MatroidOmp),
            _ => Err(format!(
                "unknown algorithm '{s}' (expected classical, omp, stochastic-omp or matroid-omp)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Harness {
    Plan,
    Spfd,
    GradientFlow,
    DualityGap,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub cost: Option<PathBuf>,
    pub gram_source: Option<PathBuf>,
    pub gram_target: Option<PathBuf>,
    pub weights_source: Option<PathBuf>,
    pub weights_target: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,

    pub kernel: KernelFamily,
    pub sigma2: Bandwidth,
    pub cost_kind: CostKind,
    /// Scale point-derived costs to a maximum entry of 1.
    pub normalize_cost: bool,
    pub lambda1: f64,
    pub lambda2: f64,
    pub algorithm: Algorithm,
    pub k: Option<usize>,
    pub k_per_column: Option<usize>,
    pub epsilon: f64,
    pub seed: u64,
    pub max_iter: usize,
    pub support_tol: f64,

    pub rows: usize,
    pub cols: usize,
    pub samples: usize,
    pub edges: Vec<usize>,
    pub learning_rate: f64,
    pub iterations: usize,
    pub lambda1_grid: Vec<f64>,
    pub lambda2_grid: Vec<f64>,
}

impl RunConfig {
    pub fn defaults(harness: Harness) -> Self {
        let mut cfg = RunConfig {
            source: None,
            target: None,
            cost: None,
            gram_source: None,
            gram_target: None,
            weights_source: None,
            weights_target: None,
            out: None,
            report: None,
            kernel: KernelFamily::Rbf,
            sigma2: Bandwidth::Median,
            cost_kind: CostKind::SquaredEuclidean,
            normalize_cost: true,
            lambda1: 1.0,
            lambda2: 0.0,
            algorithm: Algorithm::StochasticOmp,
            k: None,
            k_per_column: None,
            epsilon: 0.01,
            seed: 0,
            max_iter: 1000,
            support_tol: 1e-12,
            rows: 10,
            cols: 10,
            samples: 5,
            edges: vec![10, 18, 25],
            learning_rate: 0.01,
            iterations: 200,
            lambda1_grid: vec![0.1, 1.0, 10.0],
            lambda2_grid: vec![0.1, 1.0, 10.0],
        };
        match harness {
            Harness::Plan => {}
            Harness::Spfd => {
                // one-hot node embeddings are all at squared distance 2
                cfg.sigma2 = Bandwidth::Fixed(1.0);
                cfg.lambda1 = 100.0;
            }
            Harness::GradientFlow => {
                // the particle update differentiates the raw squared distance, whose scale
                // needs a heavier marginal penalty before any mass is transported
                cfg.normalize_cost = false;
                cfg.sigma2 = Bandwidth::Fixed(1.0);
                cfg.lambda1 = 10.0;
            }
            Harness::DualityGap => {
                cfg.algorithm = Algorithm::MatroidOmp;
                cfg.lambda2 = 0.1;
            }
        }
        cfg
    }

    /// Sets one key from its textual value. Keys accept `-` or `_` as separator.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let path = || Some(PathBuf::from(value));
        match key.as_str() {
            "source" => self.source = path(),
            "target" => self.target = path(),
            "cost" => self.cost = path(),
            "gram-source" => self.gram_source = path(),
            "gram-target" => self.gram_target = path(),
            "weights-source" => self.weights_source = path(),
            "weights-target" => self.weights_target = path(),
            "out" => self.out = path(),
            "report" => self.report = path(),
            "kernel" => self.kernel = value.parse().map_err(|e: sparse_uot::UotError| e.to_string())?,
            "sigma2" => self.sigma2 = value.parse()?,
            "cost-kind" => self.cost_kind = value.parse().map_err(|e: sparse_uot::UotError| e.to_string())?,
            "normalize-cost" => self.normalize_cost = parse_bool(value)?,
            "lambda1" => self.lambda1 = parse_num(value)?,
            "lambda2" => self.lambda2 = parse_num(value)?,
            "algorithm" => self.algorithm = value.parse()?,
            "k" => self.k = Some(parse_num(value)?),
            "k-per-column" => self.k_per_column = Some(parse_num(value)?),
            "epsilon" => self.epsilon = parse_num(value)?,
            "seed" => self.seed = parse_num(value)?,
            "max-iter" => self.max_iter = parse_num(value)?,
            "support-tol" => self.support_tol = parse_num(value)?,
            "rows" => self.rows = parse_num(value)?,
            "cols" => self.cols = parse_num(value)?,
            "samples" => self.samples = parse_num(value)?,
            "edges" => self.edges = parse_list(value)?,
            "learning-rate" => self.learning_rate = parse_num(value)?,
            "iterations" => self.iterations = parse_num(value)?,
            "lambda1-grid" => self.lambda1_grid = parse_list(value)?,
            "lambda2-grid" => self.lambda2_grid = parse_list(value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        for (key, value, line) in parse_key_values(&text).map_err(|(line, msg)| CliError::at_line(path, line, msg))? {
            self.set(&key, &value).map_err(|msg| CliError::at_line(path, line, msg))?;
        }
        Ok(())
    }

    /// Applies `(key, value)` pairs given on the command line.
    pub fn apply_flags<'a>(&mut self, flags: impl IntoIterator<Item = (&'a str, String)>) -> CliResult<()> {
        for (key, value) in flags {
            self.set(key, &value).map_err(|msg| CliError::input(format!("--{key}: {msg}")))?;
        }
        Ok(())
    }

    /// Defaults for `harness`, overridden by `file` (if any), overridden by `flags`.
    pub fn resolve<'a>(
        harness: Harness,
        file: Option<&Path>,
        flags: impl IntoIterator<Item = (&'a str, String)>,
    ) -> CliResult<Self> {
        let mut cfg = Self::defaults(harness);
        if let Some(path) = file {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::input(msg));
        if !(self.lambda1 > 0.0 && self.lambda1.is_finite()) {
            return bad(format!("lambda1 must be > 0, got {}", self.lambda1));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return bad(format!("lambda2 must be >= 0, got {}", self.lambda2));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.max_iter == 0 {
            return bad("max-iter must be >= 1".into());
        }
        if !(self.support_tol > 0.0) {
            return bad("support-tol must be > 0".into());
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning-rate must be >= 0, got {}", self.learning_rate));
        }
        if self.k == Some(0) || self.k_per_column == Some(0) {
            return bad("sparsity levels must be >= 1".into());
        }
        Ok(())
    }

    pub fn solver_config(&self) -> sparse_uot::SolverConfig<f64> {
        sparse_uot::SolverConfig {
            max_iter: self.max_iter,
            support_tol: self.support_tol,
            seed: self.seed,
            epsilon: self.epsilon,
            ..Default::default()
        }
    }
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String, usize)>, (usize, String)> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err((idx + 1, format!("expected key = value, got '{line}'")));
        };
        if k.trim().is_empty() {
            return Err((idx + 1, "empty key".into()));
        }
        out.push((k.trim().to_string(), v.trim().to_string(), idx + 1));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse '{s}' as a number"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("expected a boolean, got '{s}'")),
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    let items: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_num)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}
