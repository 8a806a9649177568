//! Command-line front end for `sparse-uot`: plan export and the SPFD, gradient-flow
//! and duality-gap harnesses.

pub mod commands;
pub mod config;
pub mod error;
pub mod inputs;
pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Harness, RunConfig};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "sparse-uot", version, about = "Structured-sparse unbalanced optimal transport")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a sparse transport plan and write it as COO text.
    Plan(SharedArgs),
    /// Sparse process flexibility design on a synthetic instance.
    Spfd(SpfdArgs),
    /// Move a source cloud towards a target by particle gradient flow.
    GradientFlow(FlowArgs),
    /// Duality gaps of column-sparse plans over a (lambda1, lambda2) grid.
    DualityGap(GapArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct SharedArgs {
    /// Flat key = value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Source point cloud CSV.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Target point cloud CSV.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Cost matrix CSV (used as given).
    #[arg(long)]
    pub cost: Option<PathBuf>,
    #[arg(long)]
    pub gram_source: Option<PathBuf>,
    #[arg(long)]
    pub gram_target: Option<PathBuf>,
    #[arg(long)]
    pub weights_source: Option<PathBuf>,
    #[arg(long)]
    pub weights_target: Option<PathBuf>,
    #[arg(long, value_parser = ["rbf", "imq", "imq-v2"])]
    pub kernel: Option<String>,
    /// Kernel bandwidth or "median".
    #[arg(long)]
    pub sigma2: Option<String>,
    #[arg(long, value_parser = ["squared-euclidean", "cosine"])]
    pub cost_kind: Option<String>,
    #[arg(long)]
    pub normalize_cost: Option<bool>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long, value_parser = ["classical", "omp", "stochastic-omp", "matroid-omp"])]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_per_column: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub support_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

macro_rules! collect_flags {
    ($src:expr, $out:ident; $($field:ident => $key:literal),* $(,)?) => {
        $( if let Some(v) = &$src.$field { $out.push(($key, v.to_string())); } )*
    };
}

macro_rules! collect_paths {
    ($src:expr, $out:ident; $($field:ident => $key:literal),* $(,)?) => {
        $( if let Some(v) = &$src.$field { $out.push(($key, v.display().to_string())); } )*
    };
}

impl SharedArgs {
    pub fn flags(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        collect_paths!(self, out;
            source => "source", target => "target", cost => "cost",
            gram_source => "gram-source", gram_target => "gram-target",
            weights_source => "weights-source", weights_target => "weights-target",
            out => "out", report => "report",
        );
        collect_flags!(self, out;
            kernel => "kernel", sigma2 => "sigma2", cost_kind => "cost-kind",
            normalize_cost => "normalize-cost", lambda1 => "lambda1", lambda2 => "lambda2",
            algorithm => "algorithm", k => "k", k_per_column => "k-per-column",
            epsilon => "epsilon", seed => "seed", max_iter => "max-iter", support_tol => "support-tol",
        );
        out
    }

    pub fn resolve(&self, harness: Harness, extra: Vec<(&'static str, String)>) -> CliResult<RunConfig> {
        let mut flags = self.flags();
        flags.extend(extra);
        RunConfig::resolve(harness, self.config.as_deref(), flags)
    }
}

#[derive(Debug, Args, Clone)]
pub struct SpfdArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Plants (supply nodes).
    #[arg(long)]
    pub rows: Option<usize>,
    /// Products (demand nodes).
    #[arg(long)]
    pub cols: Option<usize>,
    /// Demand samples z.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated edge budgets l.
    #[arg(long)]
    pub edges: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct FlowArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct GapArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Comma-separated lambda1 values.
    #[arg(long)]
    pub lambda1_grid: Option<String>,
    /// Comma-separated lambda2 values (all > 0).
    #[arg(long)]
    pub lambda2_grid: Option<String>,
}

impl Command {
    pub fn resolve(&self) -> CliResult<(Harness, RunConfig)> {
        let mut extra = Vec::new();
        let (harness, shared) = match self {
            Command::Plan(a) => (Harness::Plan, a),
            Command::Spfd(a) => {
                collect_flags!(a, extra; rows => "rows", cols => "cols", samples => "samples", edges => "edges");
                (Harness::Spfd, &a.shared)
            }
            Command::GradientFlow(a) => {
                collect_flags!(a, extra; learning_rate => "learning-rate", iterations => "iterations");
                (Harness::GradientFlow, &a.shared)
            }
            Command::DualityGap(a) => {
                collect_flags!(a, extra; lambda1_grid => "lambda1-grid", lambda2_grid => "lambda2-grid");
                (Harness::DualityGap, &a.shared)
            }
        };
        Ok((harness, shared.resolve(harness, extra)?))
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let (harness, cfg) = cli.command.resolve()?;
    match harness {
        Harness::Plan => commands::plan::execute(&cfg),
        Harness::Spfd => commands::spfd::execute(&cfg),
        Harness::GradientFlow => commands::gradient_flow::execute(&cfg),
        Harness::DualityGap => commands::duality_gap::execute(&cfg),
    }
}
