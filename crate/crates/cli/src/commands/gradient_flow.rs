//! Particle gradient flow of a source cloud towards a target under the sparse UOT divergence.
//!
//! Each step solves the sparse problem between the current source and the target, then
//! moves every source point along `−∂⟨C, γ*⟩/∂xᵢ` with the plan held fixed, divided by
//! the point's mass so the step is per-particle.

use serde::Serialize;
use sparse_uot::{
    cost_matrix, gram_matrix, objective, DiscreteMeasure, KernelSpec, PointCloud, ProblemInstance,
};

use crate::commands::plan::run_algorithm;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::inputs::resolve_bandwidth;
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub sparsity: usize,
}

impl FlowConfig {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(CliError::input(format!("learning rate must be >= 0, got {}", self.learning_rate)));
        }
        if self.sparsity == 0 {
            return Err(CliError::input("flow sparsity must be >= 1"));
        }
        Ok(())
    }
}

/// `‖Σμᵢδ(xᵢ) − Σνⱼδ(yⱼ)‖²` in the kernel's RKHS.
pub fn squared_mmd(
    spec: &KernelSpec<f64>,
    x: &PointCloud<f64>,
    mu: &[f64],
    y: &PointCloud<f64>,
    nu: &[f64],
) -> f64 {
    let k = |a: &[f64], b: &[f64]| spec.of_sq_dist(sparse_uot::squared_distance(a, b));
    let block = |p: &PointCloud<f64>, wp: &[f64], q: &PointCloud<f64>, wq: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (i, &a) in wp.iter().enumerate() {
            for (j, &b) in wq.iter().enumerate() {
                acc += a * b * k(p.point(i), q.point(j));
            }
        }
        acc
    };
    (block(x, mu, x, mu) - 2.0 * block(x, mu, y, nu) + block(y, nu, y, nu)).max(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowStep {
    pub iteration: usize,
    pub mmd2: f64,
    pub objective: f64,
    pub nonzeros: usize,
}

#[derive(Debug, Serialize)]
pub struct FlowReport {
    pub bandwidth: f64,
    pub sparsity: usize,
    pub learning_rate: f64,
    pub initial_mmd2: f64,
    pub final_mmd2: f64,
    pub steps: Vec<FlowStep>,
}

pub struct FlowOutput {
    pub report: FlowReport,
    /// Source positions before the first step and after every step.
    pub trajectory: Vec<PointCloud<f64>>,
}

pub fn cmd_gradient_flow(
    source: &PointCloud<f64>,
    mu: &DiscreteMeasure<f64>,
    target: &PointCloud<f64>,
    nu: &DiscreteMeasure<f64>,
    flow: &FlowConfig,
    cfg: &RunConfig,
) -> CliResult<FlowOutput> {
    flow.validate()?;
    if source.count() != mu.len() || target.count() != nu.len() {
        return Err(CliError::input("weights do not match the point counts"));
    }
    if source.dim() != target.dim() {
        return Err(CliError::input("source and target dimensions differ"));
    }
    // fixed for the whole run so the divergence being descended does not change
    let bandwidth = resolve_bandwidth(cfg, source, target)?;
    let spec = KernelSpec::new(cfg.kernel, bandwidth)?;
    let g2 = gram_matrix(&spec, target)?;
    let mut run_cfg = cfg.clone();
    run_cfg.k = Some(flow.sparsity.min(source.count() * target.count()));

    let mut x = source.clone();
    let mut trajectory = vec![x.clone()];
    let mut steps = Vec::with_capacity(flow.iterations);
    let initial_mmd2 = squared_mmd(&spec, &x, mu.weights(), target, nu.weights());
    let dim = x.dim();

    for it in 1..=flow.iterations {
        let raw = cost_matrix(cfg.cost_kind, &x, target, false)?;
        let scale = if cfg.normalize_cost {
            raw.matrix().max_entry().filter(|&v| v > 0.0).map_or(1.0, |v| 1.0 / v)
        } else {
            1.0
        };
        let cost = if cfg.normalize_cost { raw.normalized() } else { raw };
        let instance = ProblemInstance::new(
            cost,
            gram_matrix(&spec, &x)?,
            g2.clone(),
            mu.clone(),
            nu.clone(),
            cfg.lambda1,
            cfg.lambda2,
        )?;
        let (outcome, _) = run_algorithm(&instance, &run_cfg)?;
        let value = objective(&instance, &outcome.plan)?;

        let mut grad = vec![0.0; x.count() * dim];
        for (&(i, j), &g) in outcome.plan.entries() {
            if g == 0.0 {
                continue;
            }
            let (xi, yj) = (x.point(i), target.point(j));
            for d in 0..dim {
                grad[i * dim + d] += g * 2.0 * scale * (xi[d] - yj[d]);
            }
        }
        for i in 0..x.count() {
            let w = mu.weights()[i];
            let p = x.point_mut(i);
            for d in 0..dim {
                p[d] -= flow.learning_rate * grad[i * dim + d] / w;
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Numerical(format!(
                    "gradient flow diverged at iteration {it}: point {i} has non-finite coordinates"
                )));
            }
        }
        steps.push(FlowStep {
            iteration: it,
            mmd2: squared_mmd(&spec, &x, mu.weights(), target, nu.weights()),
            objective: value,
            nonzeros: outcome.plan.nonzero_support(cfg.support_tol).len(),
        });
        trajectory.push(x.clone());
    }
    let final_mmd2 = steps.last().map_or(initial_mmd2, |s| s.mmd2);
    Ok(FlowOutput {
        report: FlowReport {
            bandwidth,
            sparsity: run_cfg.k.unwrap_or(0),
            learning_rate: flow.learning_rate,
            initial_mmd2,
            final_mmd2,
            steps,
        },
        trajectory,
    })
}

pub fn trajectory_csv(trajectory: &[PointCloud<f64>]) -> String {
    let dim = trajectory.first().map_or(0, |c| c.dim());
    let mut s = String::from("iteration,point");
    for d in 0..dim {
        s.push_str(&format!(",x{d}"));
    }
    s.push('\n');
    for (it, cloud) in trajectory.iter().enumerate() {
        for (i, p) in cloud.points().enumerate() {
            s.push_str(&format!("{it},{i}"));
            for v in p {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
    }
    s
}

pub fn execute(cfg: &RunConfig) -> CliResult<()> {
    let (Some(sp), Some(tp)) = (&cfg.source, &cfg.target) else {
        return Err(CliError::input("gradient-flow needs --source and --target point clouds"));
    };
    let source = io::read_points(sp)?;
    let target = io::read_points(tp)?;
    let mu = match &cfg.weights_source {
        Some(p) => io::read_weights(p)?,
        None => DiscreteMeasure::uniform(source.count()),
    };
    let nu = match &cfg.weights_target {
        Some(p) => io::read_weights(p)?,
        None => DiscreteMeasure::uniform(target.count()),
    };
    let flow = FlowConfig {
        learning_rate: cfg.learning_rate,
        iterations: cfg.iterations,
        sparsity: cfg.k.unwrap_or(source.count() + target.count()),
    };
    let out = cmd_gradient_flow(&source, &mu, &target, &nu, &flow, cfg)?;
    if let Some(path) = &cfg.out {
        io::write_text(path, &trajectory_csv(&out.trajectory))?;
    }
    let json = serde_json::to_string_pretty(&out.report)?;
    match &cfg.report {
        Some(path) => io::write_text(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}
