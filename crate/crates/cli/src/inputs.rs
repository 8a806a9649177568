//! Builds a problem instance from the files named in a [`RunConfig`].

use sparse_uot::{
    cost_matrix, gram_matrix, median_heuristic, CostMatrix, DiscreteMeasure, GramMatrix, KernelSpec, PointCloud,
    ProblemInstance,
};

use crate::config::{Bandwidth, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io;

pub struct LoadedProblem {
    pub instance: ProblemInstance<f64>,
    pub source: Option<PointCloud<f64>>,
    pub target: Option<PointCloud<f64>>,
    /// σ² actually used for point-derived Gram matrices.
    pub bandwidth: Option<f64>,
}

pub fn resolve_bandwidth(cfg: &RunConfig, source: &PointCloud<f64>, target: &PointCloud<f64>) -> CliResult<f64> {
    match cfg.sigma2 {
        Bandwidth::Fixed(v) => Ok(v),
        Bandwidth::Median => Ok(median_heuristic(source, target)?),
    }
}

fn read_measure(path: Option<&std::path::Path>, len: usize, side: &str) -> CliResult<DiscreteMeasure<f64>> {
    match path {
        None => Ok(DiscreteMeasure::uniform(len)),
        Some(p) => {
            let w = io::read_weights(p)?;
            if w.len() != len {
                return Err(CliError::input(format!(
                    "{}: {side} weights have {} entries but there are {len} {side} points",
                    p.display(),
                    w.len()
                )));
            }
            Ok(w)
        }
    }
}

pub fn load_problem(cfg: &RunConfig) -> CliResult<LoadedProblem> {
    let source = cfg.source.as_deref().map(io::read_points).transpose()?;
    let target = cfg.target.as_deref().map(io::read_points).transpose()?;

    let cost = match (&cfg.cost, &source, &target) {
        (Some(path), _, _) => CostMatrix::from_matrix(io::read_matrix(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        (None, Some(s), Some(t)) => cost_matrix(cfg.cost_kind, s, t, cfg.normalize_cost)?,
        _ => {
            return Err(CliError::input(
                "need --cost, or both --source and --target point clouds",
            ))
        }
    };
    let (m, n) = (cost.rows(), cost.cols());

    let needs_kernel = cfg.gram_source.is_none() || cfg.gram_target.is_none();
    let bandwidth = match (&source, &target) {
        (Some(s), Some(t)) if needs_kernel => Some(resolve_bandwidth(cfg, s, t)?),
        _ => None,
    };
    let gram = |file: &Option<std::path::PathBuf>, cloud: &Option<PointCloud<f64>>, side: &str| -> CliResult<GramMatrix<f64>> {
        if let Some(path) = file {
            return GramMatrix::from_matrix(io::read_matrix(path)?)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())));
        }
        match (cloud, bandwidth) {
            (Some(c), Some(bw)) => Ok(gram_matrix(&KernelSpec::new(cfg.kernel, bw)?, c)?),
            (Some(_), None) => Err(CliError::input(format!(
                "the {side} Gram matrix needs both point clouds for the bandwidth"
            ))),
            (None, _) => Err(CliError::input(format!(
                "need --gram-{side} or a {side} point cloud to build the {side} Gram matrix"
            ))),
        }
    };
    let g1 = gram(&cfg.gram_source, &source, "source")?;
    let g2 = gram(&cfg.gram_target, &target, "target")?;
    for (cloud, len, side) in [(&source, m, "source"), (&target, n, "target")] {
        if let Some(c) = cloud {
            if c.count() != len {
                return Err(CliError::input(format!(
                    "{side} cloud has {} points but the cost matrix has {len} on that side",
                    c.count()
                )));
            }
        }
    }
    let mu = read_measure(cfg.weights_source.as_deref(), m, "source")?;
    let nu = read_measure(cfg.weights_target.as_deref(), n, "target")?;
    let instance = ProblemInstance::new(cost, g1, g2, mu, nu, cfg.lambda1, cfg.lambda2)?;
    Ok(LoadedProblem {
        instance,
        source,
        target,
        bandwidth,
    })
}
