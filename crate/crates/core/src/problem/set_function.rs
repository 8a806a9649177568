use std::collections::HashMap;

use super::{solve_restricted, Index, ProblemInstance, RestrictedSolution, SolverConfig, SparsePlan, SupportSet};
use crate::error::Result;
use crate::scalar::Scalar;

/// `F(S) = U(0) − min { U(γ) : γ ≥ 0, supp(γ) ⊆ S }` with per-run memoization.
///
/// The cache is keyed by the sorted support and lives as long as this value;
/// create one per greedy run.
pub struct SetFunction<'a, T> {
    instance: &'a ProblemInstance<T>,
    config: &'a SolverConfig<T>,
    cache: HashMap<SupportSet, RestrictedSolution<T>>,
    solver_calls: usize,
    inner_iterations: usize,
}

impl<'a, T: Scalar> SetFunction<'a, T> {
    pub fn new(instance: &'a ProblemInstance<T>, config: &'a SolverConfig<T>) -> Self {
        SetFunction {
            instance,
            config,
            cache: HashMap::new(),
            solver_calls: 0,
            inner_iterations: 0,
        }
    }

    pub fn instance(&self) -> &'a ProblemInstance<T> {
        self.instance
    }

    /// Restricted minimizer on `support`, solved at most once per support.
    pub fn solve(&mut self, support: &SupportSet, warm: Option<&SparsePlan<T>>) -> Result<RestrictedSolution<T>> {
        if let Some(hit) = self.cache.get(support) {
            return Ok(hit.clone());
        }
        let sol = if support.is_empty() {
            solve_restricted(self.instance, support, None, self.config)?
        } else {
            self.solver_calls += 1;
            let s = solve_restricted(self.instance, support, warm, self.config)?;
            self.inner_iterations += s.iterations;
            s
        };
        self.cache.insert(support.clone(), sol.clone());
        Ok(sol)
    }

    pub fn value(&mut self, support: &SupportSet) -> Result<T> {
        self.value_warm(support, None)
    }

    pub fn value_warm(&mut self, support: &SupportSet, warm: Option<&SparsePlan<T>>) -> Result<T> {
        if support.is_empty() {
            return Ok(T::zero());
        }
        let sol = self.solve(support, warm)?;
        Ok(self.instance.const0() - sol.objective)
    }

    /// `F(u | S)`
    pub fn marginal_gain(&mut self, base: &SupportSet, u: Index) -> Result<T> {
        let with = base.with(u);
        Ok(self.value(&with)? - self.value(base)?)
    }

    /// Number of restricted solves actually run (cache hits excluded).
    pub fn solver_calls(&self) -> usize {
        self.solver_calls
    }

    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations
    }
}

/// One-shot evaluation of `F(S)` without a shared cache.
pub fn set_function_value<T: Scalar>(
    instance: &ProblemInstance<T>,
    support: &SupportSet,
    config: &SolverConfig<T>,
) -> Result<T> {
    SetFunction::new(instance, config).value(support)
}
