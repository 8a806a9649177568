//! Acceptance suite: one line per criterion, then a summary.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always printed.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_uot::{
    cost_matrix, curvature, duality_gap, gram_matrix, matroid_omp, median_heuristic, objective, omp_greedy,
    solve_restricted, sparse_conjugate, stochastic_omp, CostKind, DiscreteMeasure, GradientOracle, KernelFamily,
    KernelSpec, MatroidConstraint, PointCloud, ProblemInstance, SetFunction, SolverConfig, SparsePlan, SupportSet,
};
use sparse_uot_cli::commands::{duality_gap::gap_grid, gradient_flow, spfd};
use sparse_uot_cli::config::{Harness, RunConfig};
use sparse_uot_cli::io;

/// Criteria expected to fail, with the reason printed next to them.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    4,
    "the RSC constant u_lower is not a lower bound on the restricted curvature; see README",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// The 3×3 (and 2×2) RBF fixture of criteria 3 to 6: seed 0, median-heuristic bandwidth, λ₁ = 1, λ₂ = 0.
fn lemma_instance(m: usize, n: usize) -> ProblemInstance<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let src = random_cloud(&mut rng, m, 2, 2.0);
    let tgt = random_cloud(&mut rng, n, 2, 2.0);
    let spec = KernelSpec::new(KernelFamily::Rbf, median_heuristic(&src, &tgt).unwrap()).unwrap();
    ProblemInstance::new(
        cost_matrix(CostKind::SquaredEuclidean, &src, &tgt, true).unwrap(),
        gram_matrix(&spec, &src).unwrap(),
        gram_matrix(&spec, &tgt).unwrap(),
        random_measure(&mut rng, m),
        random_measure(&mut rng, n),
        1.0,
        0.0,
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let families = [KernelFamily::Rbf, KernelFamily::Imq, KernelFamily::ImqV2];
    for t in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + t);
        let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let l2 = if t % 2 == 0 { 0.0 } else { 0.1 };
        let inst = random_instance(100 + t, m, n, families[t as usize % 3], 1.0, 1.0, l2);
        let cells = inst.ground_set();
        let values: Vec<f64> = cells.iter().map(|_| rng.gen_range(0.0..0.3)).collect();
        let at = |shift: Option<(usize, f64)>| {
            let mut v = values.clone();
            if let Some((p, d)) = shift {
                v[p] += d;
            }
            let plan = SparsePlan::new(cells.iter().copied().collect(), v).unwrap();
            objective(&inst, &plan).unwrap()
        };
        let plan = SparsePlan::new(cells.iter().copied().collect(), values.clone()).unwrap();
        let mut oracle = GradientOracle::new(&inst, &plan).unwrap();
        for (p, &u) in cells.iter().enumerate() {
            let g = oracle.partial(u).unwrap();
            let fd = (at(Some((p, h))) - at(Some((p, -h)))) / (2.0 * h);
            worst = worst.max((g - fd).abs() / g.abs().max(fd.abs()).max(1.0));
        }
    }
    outcome(
        worst <= 1e-6,
        format!("max relative error {worst:.2e} vs central differences (h = 1e-6) on 20 instances"),
    )
}

fn criterion_2() -> Outcome {
    let inst = random_instance(2024, 5, 5, KernelFamily::Rbf, 1.0, 1.0, 0.0);
    let cfg = SolverConfig::default();
    let ground = inst.ground_set();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_kkt, mut worst_gap): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let size = rng.gen_range(3..=25);
        let mut cells = ground.clone();
        while cells.len() > size {
            cells.remove(rng.gen_range(0..cells.len()));
        }
        let support: SupportSet = cells.into_iter().collect();
        let sol = solve_restricted(&inst, &support, None, &cfg).unwrap();
        worst_kkt = worst_kkt.max(sol.kkt_residual);
        let oracle = projected_gradient_oracle(&inst, &support, 100_000);
        worst_gap = worst_gap.max((sol.objective - oracle).abs());
    }
    outcome(
        worst_kkt <= 1e-6 && worst_gap <= 1e-8,
        format!("max KKT residual {worst_kkt:.2e}, max |U - U_pgd| {worst_gap:.2e} on 10 supports of a 5x5 instance"),
    )
}

/// `F` on every support of the lemma fixture with at most `max` cells.
struct Table<'a> {
    f: SetFunction<'a, f64>,
}

impl Table<'_> {
    fn value(&mut self, s: &SupportSet) -> f64 {
        self.f.value(s).unwrap()
    }

    fn gradient_plus(&mut self, s: &SupportSet, inst: &ProblemInstance<f64>, u: (usize, usize)) -> f64 {
        let plan = self.f.solve(s, None).unwrap().plan;
        let mut oracle = GradientOracle::new(inst, &plan).unwrap();
        (-oracle.partial(u).unwrap()).max(0.0)
    }
}

fn criterion_3() -> Outcome {
    let inst = lemma_instance(3, 3);
    let d = curvature(&inst, 2);
    let cfg = tight_config();
    let mut t = Table { f: SetFunction::new(&inst, &cfg) };
    let ground = inst.ground_set();
    let sets = subsets_up_to(&ground, 4);
    let (mut monotone, mut nonneg, mut ratio_ok) = (true, true, true);
    let mut worst: f64 = f64::INFINITY;
    let mut pairs = 0usize;
    for s in &sets {
        let fs = t.value(s);
        nonneg &= fs >= -1e-9;
        if s.len() < 4 {
            for &u in &ground {
                if !s.contains(u) {
                    monotone &= t.value(&s.with(u)) >= fs - 1e-9;
                }
            }
        }
        for a in sets.iter().filter(|a| !a.is_empty() && a.len() + s.len() <= 4 && a.is_disjoint(s)) {
            pairs += 1;
            let joint = t.value(&s.union(a)) - fs;
            let singles: f64 = a.iter().map(|&u| t.value(&s.with(u)) - fs).sum();
            let slack = singles - d.alpha_lower * joint;
            worst = worst.min(slack);
            ratio_ok &= slack >= -1e-9;
        }
    }
    outcome(
        monotone && nonneg && ratio_ok && d.reliable,
        format!(
            "monotone {monotone}, nonnegative {nonneg}, alpha_lower {:.4}, min slack {worst:.2e} over {pairs} (S, A) pairs",
            d.alpha_lower
        ),
    )
}

fn criterion_4() -> Outcome {
    let inst = lemma_instance(3, 3);
    let d = curvature(&inst, 2);
    let cfg = tight_config();
    let mut t = Table { f: SetFunction::new(&inst, &cfg) };
    let ground = inst.ground_set();
    let (mut lower_worst, mut upper_worst) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut upper_violations = 0usize;
    let mut checks = 0usize;
    for s in subsets_up_to(&ground, 3) {
        let fs = t.value(&s);
        let rest: Vec<_> = ground.iter().copied().filter(|&u| !s.contains(u)).collect();
        let g: Vec<f64> = rest.iter().map(|&u| t.gradient_plus(&s, &inst, u)).collect();
        for (p, &u) in rest.iter().enumerate() {
            let gain = t.value(&s.with(u)) - fs;
            lower_worst = lower_worst.min(gain - g[p] * g[p] / (2.0 * d.u_tilde1));
        }
        for a in subsets_up_to(&rest, 2).into_iter().filter(|a| !a.is_empty()) {
            checks += 1;
            let gain = t.value(&s.union(&a)) - fs;
            let bound: f64 = a
                .iter()
                .map(|u| {
                    let gp = g[rest.iter().position(|v| v == u).unwrap()];
                    gp * gp
                })
                .sum::<f64>()
                / (2.0 * d.u_lower);
            upper_worst = upper_worst.max(gain - bound);
            if gain > bound + 1e-9 {
                upper_violations += 1;
            }
        }
    }
    let lower_ok = lower_worst >= -1e-9;
    let upper_ok = upper_worst <= 1e-9;
    outcome(
        lower_ok && upper_ok,
        format!(
            "smoothness bound {} (min slack {lower_worst:.2e}); curvature bound {} ({upper_violations}/{checks} violated, max excess {upper_worst:.3e}, u_lower {:.4})",
            if lower_ok { "holds" } else { "FAILS" },
            if upper_ok { "holds" } else { "FAILS" },
            d.u_lower
        ),
    )
}

fn criterion_5() -> Outcome {
    let inst = lemma_instance(3, 3);
    let d = curvature(&inst, 2);
    let cfg = tight_config();
    let eps = 0.01;
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [1usize, 2] {
        let opt = exhaustive_opt(&inst, k, &cfg);
        let factor = 1.0 - (-d.alpha_lower).exp();
        let mean = (0..50u64)
            .map(|seed| {
                let c = SolverConfig { seed, epsilon: eps, ..cfg.clone() };
                stochastic_omp(&inst, k, &c).unwrap().f_value()
            })
            .sum::<f64>()
            / 50.0;
        let omp = omp_greedy(&inst, k, &cfg).unwrap().f_value();
        let stoch_ok = mean >= (factor - eps) * opt - 0.02 * opt;
        let omp_ok = omp >= factor * opt;
        pass &= stoch_ok && omp_ok;
        parts.push(format!(
            "K={k}: OPT {opt:.5}, stochastic mean {:.3}·OPT, OMP {:.3}·OPT, bound {factor:.3}",
            mean / opt,
            omp / opt
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let inst = lemma_instance(2, 2);
    let d = curvature(&inst, 2);
    let cfg = tight_config();
    let matroid = MatroidConstraint::partition(1, 2, 2).unwrap();
    let mut f = SetFunction::new(&inst, &cfg);
    let mut opt: f64 = 0.0;
    for r0 in 0..2 {
        for r1 in 0..2 {
            let base = SupportSet::from_elements(vec![(r0, 0), (r1, 1)]).unwrap();
            opt = opt.max(f.value(&base).unwrap());
        }
    }
    let mut independent = true;
    let mut total = 0.0;
    for seed in 0..30u64 {
        let out = matroid_omp(&inst, &matroid, &SolverConfig { seed, ..cfg.clone() }).unwrap();
        independent &= matroid.is_independent(&out.support);
        total += out.f_value();
    }
    let mean = total / 30.0;
    let factor = (1.0 + d.u_tilde1 / d.u_lower).powi(-2);
    outcome(
        independent && mean >= factor * opt - 0.02 * opt,
        format!("mean {:.4}·OPT vs bound {factor:.4}, all outputs independent: {independent}", mean / opt),
    )
}

fn criterion_7() -> Outcome {
    let mut worst_conj: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let w: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let k = rng.gen_range(1..=6);
        let l2 = rng.gen_range(0.05..2.0);
        let mut best: f64 = 0.0;
        for mask in 0u32..64 {
            if mask.count_ones() as usize <= k {
                let v: f64 = (0..6)
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| w[b].max(0.0).powi(2) / (2.0 * l2))
                    .sum();
                best = best.max(v);
            }
        }
        worst_conj = worst_conj.max((sparse_conjugate(&w, k, l2).unwrap().value - best).abs());
    }

    let base = random_instance(31, 4, 5, KernelFamily::Rbf, 1.0, 1.0, 0.1);
    let mut min_gap = f64::INFINITY;
    let mut vacuous_max: f64 = 0.0;
    let mut rows = 0;
    for k2 in [1usize, 2, 4] {
        let mut cfg = RunConfig::defaults(Harness::DualityGap);
        cfg.k_per_column = Some(k2);
        cfg.lambda1_grid = vec![0.1, 1.0, 10.0];
        cfg.lambda2_grid = vec![0.1, 1.0];
        let report = gap_grid(&base, &cfg).unwrap();
        for r in &report.rows {
            rows += 1;
            min_gap = min_gap.min(r.gap);
            if k2 == 4 {
                vacuous_max = vacuous_max.max(r.gap);
            }
        }
    }
    // also the zero plan and a converged single-column plan at lambda1 = 0.1
    let inst = base.with_lambdas(0.1, 0.1).unwrap();
    min_gap = min_gap.min(duality_gap(&inst, &SparsePlan::zero(), 2).unwrap().gap);
    outcome(
        min_gap >= -1e-9 && vacuous_max <= 1e-6 && worst_conj <= 1e-12,
        format!(
            "min gap {min_gap:.2e} over {} pairs, max gap with K2 = m {vacuous_max:.2e}, conjugate max error {worst_conj:.1e}",
            rows + 1
        ),
    )
}

fn criterion_8() -> Outcome {
    let cfg = RunConfig::defaults(Harness::Spfd);
    let instance = spfd::generate_instance(10, 10, 5, 0).unwrap();
    let report = spfd::cmd_spfd(&instance, &cfg).unwrap();
    let profits: Vec<f64> = report.results.iter().map(|r| r.expected_profit).collect();
    let ls: Vec<usize> = report.results.iter().map(|r| r.l).collect();
    let monotone = profits.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        ls == [10, 18, 25] && monotone,
        format!("expected profit over l = {ls:?}: {profits:.4?}"),
    )
}

/// Two separated square clusters of 20 points each.
fn flow_toy() -> (PointCloud<f64>, PointCloud<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cluster = |cx: f64, cy: f64| -> PointCloud<f64> {
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![cx + rng.gen_range(-0.3..0.3), cy + rng.gen_range(-0.3..0.3)])
            .collect();
        PointCloud::new(&pts).unwrap()
    };
    let source = cluster(0.0, 0.0);
    let target = cluster(1.5, 1.0);
    (source, target)
}

fn criterion_9() -> Outcome {
    let (source, target) = flow_toy();
    let cfg = RunConfig::defaults(Harness::GradientFlow);
    let flow = gradient_flow::FlowConfig {
        learning_rate: 0.01,
        iterations: 200,
        sparsity: 40,
    };
    let out = gradient_flow::cmd_gradient_flow(
        &source,
        &DiscreteMeasure::uniform(20),
        &target,
        &DiscreteMeasure::uniform(20),
        &flow,
        &cfg,
    )
    .unwrap();
    let r = &out.report;
    let ratio = r.final_mmd2 / r.initial_mmd2;
    outcome(
        ratio <= 0.5,
        format!("squared MMD {:.4e} -> {:.4e} (ratio {ratio:.4}) after 200 steps", r.initial_mmd2, r.final_mmd2),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let write_cloud = |name: &str, rng: &mut ChaCha8Rng, count: usize| {
        let mut s = String::from("x,y\n");
        for _ in 0..count {
            s.push_str(&format!("{},{}\n", rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)));
        }
        let p = dir.path().join(name);
        std::fs::write(&p, s).unwrap();
        p
    };
    let src = write_cloud("src.csv", &mut rng, 8);
    let tgt = write_cloud("tgt.csv", &mut rng, 7);
    let bin = env!("CARGO_BIN_EXE_sparse-uot");
    let run = |tag: &str| {
        let out = dir.path().join(format!("plan_{tag}.csv"));
        let report = dir.path().join(format!("report_{tag}.json"));
        let status = Command::new(bin)
            .args(["plan", "--algorithm", "stochastic-omp", "--k", "12", "--seed", "17", "--epsilon", "0.3"])
            .arg("--source")
            .arg(&src)
            .arg("--target")
            .arg(&tgt)
            .arg("--out")
            .arg(&out)
            .arg("--report")
            .arg(&report)
            .status()
            .unwrap();
        assert!(status.success());
        (out, report)
    };
    let (p1, r1) = run("a");
    let (p2, _) = run("b");
    let identical = std::fs::read(&p1).unwrap() == std::fs::read(&p2).unwrap();

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r1).unwrap()).unwrap();
    let mut cfg = RunConfig::defaults(Harness::Plan);
    cfg.source = Some(src.clone());
    cfg.target = Some(tgt.clone());
    let loaded = sparse_uot_cli::inputs::load_problem(&cfg).unwrap();
    let plan = io::read_coo(&p1, 8, 7).unwrap();
    let u = objective(&loaded.instance, &plan).unwrap();
    let f = loaded.instance.const0() - u;
    let du = (u - report["objective"].as_f64().unwrap()).abs();
    let df = (f - report["f_value"].as_f64().unwrap()).abs();
    outcome(
        identical && du <= 1e-12 && df <= 1e-12,
        format!("byte-identical plans: {identical}; round trip |dU| {du:.1e}, |dF| {df:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 10] = [
        (1, "gradient correctness", Duration::from_secs(5), criterion_1),
        (2, "restricted-solver optimality", Duration::from_secs(30), criterion_2),
        (3, "weak submodularity properties", Duration::from_secs(60), criterion_3),
        (4, "smoothness and curvature bounds", Duration::MAX, criterion_4),
        (5, "stochastic OMP guarantee", Duration::from_secs(120), criterion_5),
        (6, "matroid OMP guarantee", Duration::MAX, criterion_6),
        (7, "duality", Duration::MAX, criterion_7),
        (8, "SPFD profit trend", Duration::from_secs(120), criterion_8),
        (9, "gradient flow", Duration::MAX, criterion_9),
        (10, "determinism and I/O", Duration::MAX, criterion_10),
    ];
    let mut failed = Vec::new();
    let mut unexpected = Vec::new();
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if elapsed > limit {
            o.pass = false;
            o.detail.push_str(&format!("; runtime limit {limit:?} exceeded"));
        }
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} [{tag}] {name}: {} ({:.2} s)", o.detail, elapsed.as_secs_f64());
        if !o.pass {
            failed.push(id);
            match KNOWN_FAILURES.iter().find(|(k, _)| *k == id) {
                Some((_, why)) => println!("             known failure: {why}"),
                None => unexpected.push(id),
            }
        }
    }
    for (id, _) in KNOWN_FAILURES {
        if !failed.contains(id) {
            println!("note: criterion {id} was listed as a known failure but passed");
        }
    }
    println!(
        "summary: {}/10 criteria pass; failing: {:?}; unexpected failures: {:?}",
        10 - failed.len(),
        failed,
        unexpected
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
