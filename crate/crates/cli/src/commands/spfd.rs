//! Sparse process flexibility design: pick at most `l` plant-product edges maximizing expected profit.
//!
//! Each demand sample gets its own sparse UOT instance with budget `⌊l/z⌋`; the
//! topology is the top-`l` edges of `P ⊙ Σᵢ γᵢ`. Profit is `⟨P, γ̄⟩` of the
//! average plan restricted to those edges, without re-optimizing the mass on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sparse_uot::{
    gram_matrix, CostMatrix, DenseMatrix, DiscreteMeasure, KernelSpec, PointCloud, ProblemInstance,
};

use crate::commands::plan::run_algorithm;
use crate::config::{Bandwidth, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io;

#[derive(Debug, Clone)]
pub struct SpfdInstance {
    pub profit: DenseMatrix<f64>,
    pub supplies: Vec<f64>,
    pub demand_samples: Vec<Vec<f64>>,
}

impl SpfdInstance {
    pub fn rows(&self) -> usize {
        self.profit.rows()
    }

    pub fn cols(&self) -> usize {
        self.profit.cols()
    }
}

/// Synthetic instance: profits `U(0, 1)`, uniform supplies of total mass 1,
/// demands `U(0.5, 1.5)/n` per product and sample.
pub fn generate_instance(rows: usize, cols: usize, samples: usize, seed: u64) -> CliResult<SpfdInstance> {
    if rows == 0 || cols == 0 || samples == 0 {
        return Err(CliError::input("spfd needs rows, cols and samples >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profit = DenseMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>());
    let demand_samples = (0..samples)
        .map(|_| (0..cols).map(|_| rng.gen_range(0.5..1.5) / cols as f64).collect())
        .collect();
    Ok(SpfdInstance {
        profit,
        supplies: vec![1.0 / rows as f64; rows],
        demand_samples,
    })
}

/// Gram matrix of the kernel over one-hot node embeddings.
fn one_hot_gram(cfg: &RunConfig, size: usize) -> CliResult<sparse_uot::GramMatrix<f64>> {
    let bw = match cfg.sigma2 {
        Bandwidth::Fixed(v) => v,
        // every pair of distinct one-hot vectors is at squared distance 2
        Bandwidth::Median => 2.0,
    };
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(gram_matrix(&KernelSpec::new(cfg.kernel, bw)?, &PointCloud::new(&rows)?)?)
}

/// `C = (max P) − P`, scaled to a maximum entry of 1.
pub fn profit_to_cost(profit: &DenseMatrix<f64>) -> CliResult<CostMatrix<f64>> {
    let top = profit.max_entry().unwrap_or(0.0);
    let c = DenseMatrix::from_fn(profit.rows(), profit.cols(), |i, j| top - profit.get(i, j));
    Ok(CostMatrix::from_matrix(c)?.normalized())
}

#[derive(Debug, Clone, Serialize)]
pub struct SpfdResult {
    pub l: usize,
    pub budget_per_sample: usize,
    pub edges: Vec<(usize, usize)>,
    pub expected_profit: f64,
    pub sample_supports: Vec<usize>,
}

pub fn solve_budget(instance: &SpfdInstance, l: usize, cfg: &RunConfig) -> CliResult<SpfdResult> {
    let (m, n) = (instance.rows(), instance.cols());
    let z = instance.demand_samples.len();
    let budget = l / z;
    if budget == 0 {
        return Err(CliError::input(format!(
            "edge budget l = {l} leaves no edges per sample for z = {z} samples"
        )));
    }
    let budget = budget.min(m * n);
    let cost = profit_to_cost(&instance.profit)?;
    let g1 = one_hot_gram(cfg, m)?;
    let g2 = one_hot_gram(cfg, n)?;
    let mu = DiscreteMeasure::new(instance.supplies.clone())?;

    let mut total = vec![0.0; m * n];
    let mut sample_supports = Vec::with_capacity(z);
    for (s, nu) in instance.demand_samples.iter().enumerate() {
        let problem = ProblemInstance::new(
            cost.clone(),
            g1.clone(),
            g2.clone(),
            mu.clone(),
            DiscreteMeasure::new(nu.clone())?,
            cfg.lambda1,
            cfg.lambda2,
        )?;
        let mut sample_cfg = cfg.clone();
        sample_cfg.k = Some(budget);
        sample_cfg.k_per_column = None;
        sample_cfg.seed = cfg.seed.wrapping_add(s as u64);
        let (outcome, _) = run_algorithm(&problem, &sample_cfg)?;
        sample_supports.push(outcome.plan.nonzero_support(cfg.support_tol).len());
        for (&(i, j), &v) in outcome.plan.entries() {
            total[i * n + j] += v;
        }
    }

    let mut ranked: Vec<usize> = (0..m * n).filter(|&p| total[p] > cfg.support_tol).collect();
    let score = |p: usize| instance.profit.get(p / n, p % n) * total[p];
    ranked.sort_by(|&x, &y| score(y).partial_cmp(&score(x)).unwrap_or(std::cmp::Ordering::Equal).then(x.cmp(&y)));
    ranked.truncate(l);
    ranked.sort_unstable();
    let expected_profit = ranked.iter().map(|&p| instance.profit.get(p / n, p % n) * total[p]).sum::<f64>() / z as f64;
    Ok(SpfdResult {
        l,
        budget_per_sample: budget,
        edges: ranked.into_iter().map(|p| (p / n, p % n)).collect(),
        expected_profit,
        sample_supports,
    })
}

#[derive(Debug, Serialize)]
pub struct SpfdReport {
    pub rows: usize,
    pub cols: usize,
    pub samples: usize,
    /// Mass on the selected topology is the average greedy plan, not re-optimized.
    pub mass_reoptimized: bool,
    pub results: Vec<SpfdResult>,
    pub config: RunConfig,
}

pub fn cmd_spfd(instance: &SpfdInstance, cfg: &RunConfig) -> CliResult<SpfdReport> {
    if instance.demand_samples.iter().any(|d| d.len() != instance.cols()) || instance.supplies.len() != instance.rows() {
        return Err(CliError::input("supply/demand lengths do not match the profit matrix"));
    }
    let results = cfg
        .edges
        .iter()
        .map(|&l| solve_budget(instance, l, cfg))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SpfdReport {
        rows: instance.rows(),
        cols: instance.cols(),
        samples: instance.demand_samples.len(),
        mass_reoptimized: false,
        results,
        config: cfg.clone(),
    })
}

pub fn topology_csv(report: &SpfdReport) -> String {
    let mut s = String::from("l,i,j\n");
    for r in &report.results {
        for &(i, j) in &r.edges {
            s.push_str(&format!("{},{i},{j}\n", r.l));
        }
    }
    s
}

pub fn execute(cfg: &RunConfig) -> CliResult<()> {
    let instance = generate_instance(cfg.rows, cfg.cols, cfg.samples, cfg.seed)?;
    let report = cmd_spfd(&instance, cfg)?;
    if let Some(path) = &cfg.out {
        io::write_text(path, &topology_csv(&report))?;
    }
    if let Some(path) = &cfg.report {
        io::write_text(path, &serde_json::to_string_pretty(&report)?)?;
    }
    println!("{:>6} {:>8} {:>7} {:>16}", "l", "per-inst", "edges", "expected_profit");
    for r in &report.results {
        println!(
            "{:>6} {:>8} {:>7} {:>16.6}",
            r.l,
            r.budget_per_sample,
            r.edges.len(),
            r.expected_profit
        );
    }
    Ok(())
}
