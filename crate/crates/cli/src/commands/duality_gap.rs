//! Duality gaps of matroid-OMP plans over a grid of regularization weights.

use serde::Serialize;
use sparse_uot::{duality_gap, matroid_omp, MatroidConstraint, ProblemInstance};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::inputs::load_problem;
use crate::io;

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub nonzeros: usize,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
pub struct GapReport {
    pub k_per_column: usize,
    pub rows: Vec<GapRow>,
}

pub fn gap_grid(base: &ProblemInstance<f64>, cfg: &RunConfig) -> CliResult<GapReport> {
    let m = base.rows();
    let k2 = cfg.k_per_column.unwrap_or(m);
    if let Some(&l2) = cfg.lambda2_grid.iter().find(|&&l2| !(l2 > 0.0)) {
        return Err(CliError::input(format!(
            "duality certificates need lambda2 > 0 (got {l2}); with lambda2 = 0 the sparse conjugate is unbounded"
        )));
    }
    let matroid = MatroidConstraint::partition(k2, m, base.cols())?;
    let solver = cfg.solver_config();
    let mut rows = Vec::new();
    for &l1 in &cfg.lambda1_grid {
        for &l2 in &cfg.lambda2_grid {
            let instance = base.with_lambdas(l1, l2)?;
            let outcome = matroid_omp(&instance, &matroid, &solver)?;
            let cert = duality_gap(&instance, &outcome.plan, k2)?;
            rows.push(GapRow {
                lambda1: l1,
                lambda2: l2,
                primal: cert.primal,
                dual: cert.dual,
                gap: cert.gap,
                nonzeros: outcome.plan.nonzero_support(cfg.support_tol).len(),
                converged: outcome.trace.all_converged(),
            });
        }
    }
    Ok(GapReport { k_per_column: k2, rows })
}

pub fn cmd_duality_gap(cfg: &RunConfig) -> CliResult<GapReport> {
    let loaded = load_problem(cfg)?;
    gap_grid(&loaded.instance, cfg)
}

pub fn format_table(report: &GapReport) -> String {
    let mut s = format!(
        "{:>10} {:>10} {:>16} {:>16} {:>12}\n",
        "lambda1", "lambda2", "primal", "dual", "gap"
    );
    for r in &report.rows {
        s.push_str(&format!(
            "{:>10} {:>10} {:>16.9e} {:>16.9e} {:>12.3e}\n",
            r.lambda1, r.lambda2, r.primal, r.dual, r.gap
        ));
    }
    s
}

pub fn execute(cfg: &RunConfig) -> CliResult<()> {
    let report = cmd_duality_gap(cfg)?;
    let json = serde_json::to_string_pretty(&report)?;
    print!("{}", format_table(&report));
    if let Some(path) = cfg.out.as_ref().or(cfg.report.as_ref()) {
        io::write_text(path, &json)?;
    }
    Ok(())
}
