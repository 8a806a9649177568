//! Greedy support selection: classical greedy, OMP, stochastic OMP and matroid OMP.
//!
//! Every algorithm grows the support one cell per iteration and re-solves the
//! restricted problem, warm-started from the previous plan padded with a zero.
//!
//! Randomness: iteration `t` (1-based) draws from a ChaCha8 generator seeded with
//! `config.seed` on stream `t`, so each iteration's draws are independent of how
//! many values earlier iterations consumed.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, UotError};
use crate::matroid::MatroidConstraint;
use crate::problem::{GradientOracle, Index, ProblemInstance, SetFunction, SolverConfig, SparsePlan, SupportSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep<T> {
    pub iteration: usize,
    pub chosen: Index,
    /// Size of the set the choice was made from.
    pub candidates: usize,
    pub f_value: T,
    pub objective: T,
    /// APGD iterations spent in this step's restricted solves.
    pub inner_iterations: usize,
    pub solver_calls: usize,
    pub gradient_evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreedyTrace<T> {
    pub algorithm: &'static str,
    pub steps: Vec<TraceStep<T>>,
    pub stopped_early: bool,
}

impl<T: Scalar> GreedyTrace<T> {
    fn new(algorithm: &'static str) -> Self {
        GreedyTrace {
            algorithm,
            steps: Vec::new(),
            stopped_early: false,
        }
    }

    pub fn final_f(&self) -> T {
        self.steps.last().map_or_else(T::zero, |s| s.f_value)
    }

    pub fn total_solver_calls(&self) -> usize {
        self.steps.iter().map(|s| s.solver_calls).sum()
    }

    pub fn all_converged(&self) -> bool {
        self.steps.iter().all(|s| s.converged)
    }
}

#[derive(Debug, Clone)]
pub struct GreedyOutcome<T> {
    pub support: SupportSet,
    pub plan: SparsePlan<T>,
    pub trace: GreedyTrace<T>,
}

impl<T: Scalar> GreedyOutcome<T> {
    pub fn f_value(&self) -> T {
        self.trace.final_f()
    }
}

/// How matroid OMP picks from the best base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasePick {
    /// Uniformly at random, as the guarantee requires.
    #[default]
    UniformRandom,
    /// The base element with the largest raw score, ties by lowest linear index.
    MaxScore,
}

pub fn iteration_rng(seed: u64, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration as u64);
    rng
}

/// Candidate-set size `min(⌈(mn/K)·ln(1/ε)⌉, remaining)`.
pub fn stochastic_sample_size<T: Scalar>(ground: usize, k: usize, epsilon: T, remaining: usize) -> usize {
    let raw = (ground as f64 / k as f64) * (1.0 / epsilon.to_f64_lossy()).ln();
    (raw.ceil().max(1.0) as usize).min(remaining)
}

fn check_k<T: Scalar>(instance: &ProblemInstance<T>, k: usize) -> Result<()> {
    if k == 0 || k > instance.ground_size() {
        return Err(UotError::input(format!(
            "sparsity K must lie in [1, {}], got {k}",
            instance.ground_size()
        )));
    }
    Ok(())
}

fn remaining_cells<T: Scalar>(instance: &ProblemInstance<T>, s: &SupportSet) -> Vec<Index> {
    instance.ground_set().into_iter().filter(|&u| !s.contains(u)).collect()
}

/// Scores `−∇U(γ)` on `cells` and returns the argmax (first maximum wins) together
/// with the scores and the number of partials evaluated.
fn score_candidates<T: Scalar>(
    instance: &ProblemInstance<T>,
    plan: &SparsePlan<T>,
    cells: &[Index],
) -> Result<(Option<(Index, T)>, Vec<T>, usize)> {
    let mut oracle = GradientOracle::new(instance, plan)?;
    let mut best: Option<(Index, T)> = None;
    let mut scores = Vec::with_capacity(cells.len());
    for &u in cells {
        let g = -oracle.partial(u)?;
        scores.push(g);
        if best.is_none_or(|(_, b)| g > b) {
            best = Some((u, g));
        }
    }
    Ok((best, scores, oracle.evaluations()))
}

struct StepRecorder {
    calls: usize,
    iters: usize,
}

impl StepRecorder {
    fn start<T: Scalar>(f: &SetFunction<'_, T>) -> Self {
        StepRecorder {
            calls: f.solver_calls(),
            iters: f.inner_iterations(),
        }
    }

    fn deltas<T: Scalar>(&self, f: &SetFunction<'_, T>) -> (usize, usize) {
        (f.solver_calls() - self.calls, f.inner_iterations() - self.iters)
    }
}

/// Shared loop of the OMP variants; `candidates` picks the scored set each iteration.
fn run_omp<T: Scalar>(
    instance: &ProblemInstance<T>,
    k: usize,
    config: &SolverConfig<T>,
    algorithm: &'static str,
    mut candidates: impl FnMut(usize, Vec<Index>) -> Vec<Index>,
) -> Result<GreedyOutcome<T>> {
    check_k(instance, k)?;
    config.validate()?;
    let mut f = SetFunction::new(instance, config);
    let mut support = SupportSet::new();
    let mut plan = SparsePlan::zero();
    let mut trace = GreedyTrace::new(algorithm);

    for iteration in 1..=k {
        let rec = StepRecorder::start(&f);
        let pool = candidates(iteration, remaining_cells(instance, &support));
        let (best, _, evals) = score_candidates(instance, &plan, &pool)?;
        let Some((u, g)) = best else { break };
        if config.early_stop && g <= config.support_tol {
            trace.stopped_early = true;
            break;
        }
        support.insert(u);
        let warm = plan.restricted_to(&support);
        let sol = f.solve(&support, Some(&warm))?;
        let (calls, iters) = rec.deltas(&f);
        trace.steps.push(TraceStep {
            iteration,
            chosen: u,
            candidates: pool.len(),
            f_value: instance.const0() - sol.objective,
            objective: sol.objective,
            inner_iterations: iters,
            solver_calls: calls,
            gradient_evals: evals,
            converged: sol.converged,
        });
        plan = sol.plan;
    }
    Ok(GreedyOutcome { support, plan, trace })
}

/// Picks `argmax_e F(S ∪ {e}) − F(S)` over all remaining cells each iteration.
pub fn classical_greedy<T: Scalar>(
    instance: &ProblemInstance<T>,
    k: usize,
    config: &SolverConfig<T>,
) -> Result<GreedyOutcome<T>> {
    check_k(instance, k)?;
    config.validate()?;
    let mut f = SetFunction::new(instance, config);
    let mut support = SupportSet::new();
    let mut plan = SparsePlan::zero();
    let mut trace = GreedyTrace::new("classical");
    let mut current = T::zero();

    for iteration in 1..=k {
        let rec = StepRecorder::start(&f);
        let pool = remaining_cells(instance, &support);
        let mut best: Option<(Index, T)> = None;
        for &e in &pool {
            let cand = support.with(e);
            let warm = plan.restricted_to(&cand);
            let gain = f.value_warm(&cand, Some(&warm))? - current;
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((e, gain));
            }
        }
        let Some((u, gain)) = best else { break };
        if config.early_stop && gain <= config.support_tol {
            trace.stopped_early = true;
            break;
        }
        support.insert(u);
        let sol = f.solve(&support, None)?;
        let (calls, iters) = rec.deltas(&f);
        current = instance.const0() - sol.objective;
        trace.steps.push(TraceStep {
            iteration,
            chosen: u,
            candidates: pool.len(),
            f_value: current,
            objective: sol.objective,
            inner_iterations: iters,
            solver_calls: calls,
            gradient_evals: 0,
            converged: sol.converged,
        });
        plan = sol.plan;
    }
    Ok(GreedyOutcome { support, plan, trace })
}

/// Orthogonal matching pursuit: add the cell with the largest `−∇U(γ_S)`, then re-solve.
pub fn omp_greedy<T: Scalar>(
    instance: &ProblemInstance<T>,
    k: usize,
    config: &SolverConfig<T>,
) -> Result<GreedyOutcome<T>> {
    run_omp(instance, k, config, "omp", |_, remaining| remaining)
}

/// OMP whose argmax runs over a uniform random subset of the remaining cells of size
/// `min(⌈(mn/K)·ln(1/ε)⌉, |V∖S|)`.
pub fn stochastic_omp<T: Scalar>(
    instance: &ProblemInstance<T>,
    k: usize,
    config: &SolverConfig<T>,
) -> Result<GreedyOutcome<T>> {
    let ground = instance.ground_size();
    let (seed, eps) = (config.seed, config.epsilon);
    run_omp(instance, k, config, "stochastic-omp", move |iteration, remaining| {
        let size = stochastic_sample_size(ground, k, eps, remaining.len());
        if size >= remaining.len() {
            return remaining;
        }
        let mut rng = iteration_rng(seed, iteration);
        let mut picked = sample(&mut rng, remaining.len(), size).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|p| remaining[p]).collect()
    })
}

/// OMP under a matroid: each iteration takes a random element of the best base of `M/S`.
pub fn matroid_omp<T: Scalar>(
    instance: &ProblemInstance<T>,
    matroid: &MatroidConstraint,
    config: &SolverConfig<T>,
) -> Result<GreedyOutcome<T>> {
    matroid_omp_with_pick(instance, matroid, config, BasePick::UniformRandom)
}

pub fn matroid_omp_with_pick<T: Scalar>(
    instance: &ProblemInstance<T>,
    matroid: &MatroidConstraint,
    config: &SolverConfig<T>,
    pick: BasePick,
) -> Result<GreedyOutcome<T>> {
    config.validate()?;
    if matroid.rows != instance.rows() || matroid.cols != instance.cols() {
        return Err(UotError::dimension(format!(
            "matroid ground is {}x{} but the instance is {}x{}",
            matroid.rows,
            matroid.cols,
            instance.rows(),
            instance.cols()
        )));
    }
    let n = instance.cols();
    let mut f = SetFunction::new(instance, config);
    let mut support = SupportSet::new();
    let mut plan = SparsePlan::zero();
    let mut trace = GreedyTrace::new("matroid-omp");
    let mut scores = vec![T::zero(); instance.ground_size()];

    for iteration in 1..=matroid.rank() {
        let rec = StepRecorder::start(&f);
        let pool = matroid.extension_candidates(&support);
        if pool.is_empty() {
            break;
        }
        let (_, raw, evals) = score_candidates(instance, &plan, &pool)?;
        scores.iter_mut().for_each(|s| *s = T::zero());
        for (&(i, j), &g) in pool.iter().zip(&raw) {
            scores[i * n + j] = g;
        }
        if config.early_stop && raw.iter().all(|&g| g <= config.support_tol) {
            trace.stopped_early = true;
            break;
        }
        let base = matroid.best_base_of_contraction(&support, &scores)?;
        let u = match pick {
            BasePick::UniformRandom => {
                let mut rng = iteration_rng(config.seed, iteration);
                base.as_slice()[rng.gen_range(0..base.len())]
            }
            BasePick::MaxScore => {
                let mut best = base.as_slice()[0];
                for &c in base.iter() {
                    if scores[c.0 * n + c.1] > scores[best.0 * n + best.1] {
                        best = c;
                    }
                }
                best
            }
        };
        support.insert(u);
        let warm = plan.restricted_to(&support);
        let sol = f.solve(&support, Some(&warm))?;
        let (calls, iters) = rec.deltas(&f);
        trace.steps.push(TraceStep {
            iteration,
            chosen: u,
            candidates: pool.len(),
            f_value: instance.const0() - sol.objective,
            objective: sol.objective,
            inner_iterations: iters,
            solver_calls: calls,
            gradient_evals: evals,
            converged: sol.converged,
        });
        plan = sol.plan;
    }
    Ok(GreedyOutcome { support, plan, trace })
}
