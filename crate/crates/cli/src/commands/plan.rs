use serde::Serialize;
use sparse_uot::{
    classical_greedy, curvature, matroid_omp, objective, omp_greedy, stochastic_omp, CurvatureDiagnostics,
    GreedyOutcome, MatroidConstraint, ProblemInstance, TraceStep,
};

use crate::config::{Algorithm, RunConfig};
use crate::error::{CliError, CliResult};
use crate::inputs::load_problem;
use crate::io;

/// Runs the configured algorithm; returns the outcome and the sparsity level it targeted.
pub fn run_algorithm(instance: &ProblemInstance<f64>, cfg: &RunConfig) -> CliResult<(GreedyOutcome<f64>, usize)> {
    let solver = cfg.solver_config();
    let (m, n) = (instance.rows(), instance.cols());
    let need_k = || {
        cfg.k.ok_or_else(|| CliError::input(format!("algorithm {} needs --k", cfg.algorithm.name())))
    };
    let outcome = match cfg.algorithm {
        Algorithm::Classical => {
            let k = need_k()?;
            (classical_greedy(instance, k, &solver)?, k)
        }
        Algorithm::Omp => {
            let k = need_k()?;
            (omp_greedy(instance, k, &solver)?, k)
        }
        Algorithm::StochasticOmp => {
            let k = need_k()?;
            (stochastic_omp(instance, k, &solver)?, k)
        }
        Algorithm::MatroidOmp => {
            let matroid = match (cfg.k_per_column, cfg.k) {
                (Some(k2), _) => MatroidConstraint::partition(k2, m, n)?,
                (None, Some(k1)) => MatroidConstraint::uniform(k1, m, n)?,
                (None, None) => {
                    return Err(CliError::input("matroid-omp needs --k-per-column or --k"));
                }
            };
            (matroid_omp(instance, &matroid, &solver)?, matroid.rank())
        }
    };
    Ok(outcome)
}

#[derive(Debug, Serialize)]
pub struct PlanReport {
    pub algorithm: &'static str,
    pub sparsity: usize,
    pub f_value: f64,
    pub objective: f64,
    pub support_size: usize,
    pub nonzeros: usize,
    pub seed: u64,
    pub solver_calls: usize,
    pub all_converged: bool,
    pub stopped_early: bool,
    pub bandwidth: Option<f64>,
    pub curvature: CurvatureDiagnostics<f64>,
    pub trace: Vec<TraceStep<f64>>,
    pub config: RunConfig,
}

pub struct PlanOutput {
    pub coo: String,
    pub report: PlanReport,
}

pub fn cmd_plan(cfg: &RunConfig) -> CliResult<PlanOutput> {
    let loaded = load_problem(cfg)?;
    let instance = &loaded.instance;
    let (outcome, sparsity) = run_algorithm(instance, cfg)?;
    let value = objective(instance, &outcome.plan)?;
    let coo = io::format_coo(&outcome.plan, cfg.support_tol);
    let report = PlanReport {
        algorithm: cfg.algorithm.name(),
        sparsity,
        f_value: instance.const0() - value,
        objective: value,
        support_size: outcome.support.len(),
        nonzeros: outcome.plan.nonzero_support(cfg.support_tol).len(),
        seed: cfg.seed,
        solver_calls: outcome.trace.total_solver_calls(),
        all_converged: outcome.trace.all_converged(),
        stopped_early: outcome.trace.stopped_early,
        bandwidth: loaded.bandwidth,
        curvature: curvature(instance, sparsity),
        trace: outcome.trace.steps.clone(),
        config: cfg.clone(),
    };
    Ok(PlanOutput { coo, report })
}

pub fn execute(cfg: &RunConfig) -> CliResult<()> {
    let out = cmd_plan(cfg)?;
    match &cfg.out {
        Some(path) => io::write_text(path, &out.coo)?,
        None => print!("{}", out.coo),
    }
    let r = &out.report;
    match &cfg.report {
        Some(path) => io::write_text(path, &serde_json::to_string_pretty(r)?)?,
        None => eprintln!(
            "{}: K={} F={} objective={} nonzeros={} solver_calls={}",
            r.algorithm, r.sparsity, r.f_value, r.objective, r.nonzeros, r.solver_calls
        ),
    }
    Ok(())
}
