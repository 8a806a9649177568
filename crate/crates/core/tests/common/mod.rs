#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_uot::{
    cost_matrix, gram_matrix, CostKind, DiscreteMeasure, KernelFamily, KernelSpec, PointCloud, ProblemInstance,
    SolverConfig, SupportSet,
};

pub fn random_cloud(rng: &mut ChaCha8Rng, count: usize, dim: usize, spread: f64) -> PointCloud<f64> {
    let pts: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..spread)).collect())
        .collect();
    PointCloud::new(&pts).unwrap()
}

pub fn random_measure(rng: &mut ChaCha8Rng, len: usize) -> DiscreteMeasure<f64> {
    DiscreteMeasure::new((0..len).map(|_| rng.gen_range(0.5..1.5) / len as f64).collect()).unwrap()
}

/// Random points, squared-Euclidean cost (normalized), Gram matrices of `family` with bandwidth `sigma2`.
pub fn random_instance(
    seed: u64,
    m: usize,
    n: usize,
    family: KernelFamily,
    sigma2: f64,
    lambda1: f64,
    lambda2: f64,
) -> ProblemInstance<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = random_cloud(&mut rng, m, 2, 2.0);
    let tgt = random_cloud(&mut rng, n, 2, 2.0);
    let spec = KernelSpec::new(family, sigma2).unwrap();
    ProblemInstance::new(
        cost_matrix(CostKind::SquaredEuclidean, &src, &tgt, true).unwrap(),
        gram_matrix(&spec, &src).unwrap(),
        gram_matrix(&spec, &tgt).unwrap(),
        random_measure(&mut rng, m),
        random_measure(&mut rng, n),
        lambda1,
        lambda2,
    )
    .unwrap()
}

pub fn tight_config() -> SolverConfig<f64> {
    SolverConfig {
        max_iter: 20_000,
        rel_tol: 1e-15,
        ..SolverConfig::default()
    }
}

/// All subsets of `ground` with at most `max_size` elements.
pub fn subsets_up_to(ground: &[(usize, usize)], max_size: usize) -> Vec<SupportSet> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<(Vec<(usize, usize)>, usize)> = vec![(Vec::new(), 0)];
    for _ in 0..max_size {
        let mut next = Vec::new();
        for (set, start) in &frontier {
            for (k, &e) in ground.iter().enumerate().skip(*start) {
                let mut s = set.clone();
                s.push(e);
                out.push(s.clone());
                next.push((s, k + 1));
            }
        }
        frontier = next;
    }
    out.into_iter().map(|s| SupportSet::from_elements(s).unwrap()).collect()
}

/// Dense `U(γ)` straight from the definition, `gamma` row-major m×n.
pub fn dense_objective(inst: &ProblemInstance<f64>, gamma: &[f64]) -> f64 {
    let (m, n) = (inst.rows(), inst.cols());
    let mut r = vec![0.0; m];
    let mut c = vec![0.0; n];
    let mut lin = 0.0;
    let mut sq = 0.0;
    for i in 0..m {
        for j in 0..n {
            let g = gamma[i * n + j];
            r[i] += g;
            c[j] += g;
            lin += inst.cost().get(i, j) * g;
            sq += g * g;
        }
    }
    let quad = |d: &[f64], g: &sparse_uot::GramMatrix<f64>| -> f64 {
        let mut acc = 0.0;
        for p in 0..d.len() {
            for q in 0..d.len() {
                acc += d[p] * g.get(p, q) * d[q];
            }
        }
        acc
    };
    let dr: Vec<f64> = r.iter().zip(inst.mu().weights()).map(|(a, b)| a - b).collect();
    let dc: Vec<f64> = c.iter().zip(inst.nu().weights()).map(|(a, b)| a - b).collect();
    lin + inst.lambda1() * (quad(&dr, inst.g1()) + quad(&dc, inst.g2())) + inst.lambda2() / 2.0 * sq
}

/// Dense gradient of `U` from the definition.
pub fn dense_gradient(inst: &ProblemInstance<f64>, gamma: &[f64]) -> Vec<f64> {
    let (m, n) = (inst.rows(), inst.cols());
    let mut r = vec![0.0; m];
    let mut c = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            r[i] += gamma[i * n + j];
            c[j] += gamma[i * n + j];
        }
    }
    let gr: Vec<f64> = (0..m)
        .map(|i| (0..m).map(|p| inst.g1().get(i, p) * (r[p] - inst.mu().weights()[p])).sum())
        .collect();
    let gc: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|q| inst.g2().get(j, q) * (c[q] - inst.nu().weights()[q])).sum())
        .collect();
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            out[i * n + j] = inst.cost().get(i, j)
                + 2.0 * inst.lambda1() * (gr[i] + gc[j])
                + inst.lambda2() * gamma[i * n + j];
        }
    }
    out
}

/// Plain projected gradient descent with step `1/L` on the cells of `support`.
pub fn projected_gradient_oracle(inst: &ProblemInstance<f64>, support: &SupportSet, steps: usize) -> f64 {
    let (m, n) = (inst.rows(), inst.cols());
    // Lipschitz bound of the restricted gradient: Gershgorin on the restricted Hessian
    let cells: Vec<_> = support.iter().copied().collect();
    let mut lip: f64 = 0.0;
    for &(i, j) in &cells {
        let row: f64 = cells
            .iter()
            .map(|&(p, q)| {
                let h = 2.0 * inst.lambda1() * (inst.g1().get(i, p) + inst.g2().get(j, q))
                    + if (p, q) == (i, j) { inst.lambda2() } else { 0.0 };
                h.abs()
            })
            .sum();
        lip = lip.max(row);
    }
    let step = 1.0 / lip;
    let mut gamma = vec![0.0; m * n];
    for _ in 0..steps {
        let g = dense_gradient(inst, &gamma);
        for &(i, j) in &cells {
            let p = i * n + j;
            gamma[p] = (gamma[p] - step * g[p]).max(0.0);
        }
    }
    dense_objective(inst, &gamma)
}

/// Exhaustive best value of `F` over all supports with at most `k` cells.
pub fn exhaustive_opt(inst: &ProblemInstance<f64>, k: usize, cfg: &SolverConfig<f64>) -> f64 {
    let mut f = sparse_uot::SetFunction::new(inst, cfg);
    subsets_up_to(&inst.ground_set(), k)
        .iter()
        .map(|s| f.value(s).unwrap())
        .fold(0.0, f64::max)
}
