//! The MMD-regularized UOT objective, its gradient, restricted solves and the support set function.
//!
//! The objective of a plan `γ ≥ 0` is
//!
//! ```text
//! U(γ) = ⟨C, γ⟩ + λ₁‖γ1 − μ‖²_G₁ + λ₁‖γᵀ1 − ν‖²_G₂ + (λ₂/2)‖γ‖²
//! ```
//!
//! Plans are always held sparsely. Objective and gradient evaluations only touch
//! the rows and columns the plan's support actually uses.

mod curvature;
mod plan;
mod set_function;
mod solver;

pub use curvature::{curvature, CurvatureDiagnostics};
pub use plan::{Index, SparsePlan, SupportSet};
pub use set_function::{set_function_value, SetFunction};
pub use solver::{solve_restricted, RestrictedSolution, SolverConfig};

use std::collections::BTreeMap;

use crate::error::{Result, UotError};
use crate::geometry::{CostMatrix, DiscreteMeasure, GramMatrix};
use crate::linalg::dot;
use crate::scalar::Scalar;

/// Everything the objective needs, plus the plan-independent terms precomputed once.
#[derive(Debug, Clone)]
pub struct ProblemInstance<T> {
    cost: CostMatrix<T>,
    g1: GramMatrix<T>,
    g2: GramMatrix<T>,
    mu: DiscreteMeasure<T>,
    nu: DiscreteMeasure<T>,
    lambda1: T,
    lambda2: T,
    /// `G₁μ`
    a: Vec<T>,
    /// `G₂ν`
    b: Vec<T>,
    /// `λ₁(μᵀG₁μ + νᵀG₂ν)`, which is also `U(0)`.
    const0: T,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn new(
        cost: CostMatrix<T>,
        g1: GramMatrix<T>,
        g2: GramMatrix<T>,
        mu: DiscreteMeasure<T>,
        nu: DiscreteMeasure<T>,
        lambda1: T,
        lambda2: T,
    ) -> Result<Self> {
        let (m, n) = (cost.rows(), cost.cols());
        if g1.size() != m || mu.len() != m {
            return Err(UotError::dimension(format!(
                "cost has {m} rows but source Gram is {}x{} and source measure has {} weights",
                g1.size(),
                g1.size(),
                mu.len()
            )));
        }
        if g2.size() != n || nu.len() != n {
            return Err(UotError::dimension(format!(
                "cost has {n} columns but target Gram is {}x{} and target measure has {} weights",
                g2.size(),
                g2.size(),
                nu.len()
            )));
        }
        if !(lambda1 > T::zero()) || !lambda1.is_finite() {
            return Err(UotError::input(format!("lambda1 must be > 0, got {lambda1}")));
        }
        if !(lambda2 >= T::zero()) || !lambda2.is_finite() {
            return Err(UotError::input(format!("lambda2 must be >= 0, got {lambda2}")));
        }
        let a = g1.matrix().mul_vec(mu.weights());
        let b = g2.matrix().mul_vec(nu.weights());
        let const0 = lambda1 * (dot(mu.weights(), &a) + dot(nu.weights(), &b));
        Ok(ProblemInstance {
            cost,
            g1,
            g2,
            mu,
            nu,
            lambda1,
            lambda2,
            a,
            b,
            const0,
        })
    }

    /// Same data with different regularization weights.
    pub fn with_lambdas(&self, lambda1: T, lambda2: T) -> Result<Self> {
        Self::new(
            self.cost.clone(),
            self.g1.clone(),
            self.g2.clone(),
            self.mu.clone(),
            self.nu.clone(),
            lambda1,
            lambda2,
        )
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.cost.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cost.cols()
    }

    /// `m·n`, the size of the ground set.
    pub fn ground_size(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn cost(&self) -> &CostMatrix<T> {
        &self.cost
    }

    pub fn g1(&self) -> &GramMatrix<T> {
        &self.g1
    }

    pub fn g2(&self) -> &GramMatrix<T> {
        &self.g2
    }

    pub fn mu(&self) -> &DiscreteMeasure<T> {
        &self.mu
    }

    pub fn nu(&self) -> &DiscreteMeasure<T> {
        &self.nu
    }

    pub fn lambda1(&self) -> T {
        self.lambda1
    }

    pub fn lambda2(&self) -> T {
        self.lambda2
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn const0(&self) -> T {
        self.const0
    }

    pub fn check_index(&self, (i, j): Index) -> Result<()> {
        if i >= self.rows() || j >= self.cols() {
            return Err(UotError::input(format!(
                "index ({i}, {j}) out of range for a {}x{} plan",
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }

    pub fn check_support(&self, support: &SupportSet) -> Result<()> {
        support.iter().try_for_each(|&u| self.check_index(u))
    }

    /// Every cell of the ground set in linear-index order.
    pub fn ground_set(&self) -> Vec<Index> {
        let n = self.cols();
        (0..self.ground_size()).map(|l| (l / n, l % n)).collect()
    }

    /// Gradient at the zero plan: `Cᵢⱼ − 2λ₁(aᵢ + bⱼ)`.
    pub fn gradient_at_zero(&self, (i, j): Index) -> T {
        self.cost.get(i, j) - T::lit(2.0) * self.lambda1 * (self.a[i] + self.b[j])
    }
}

/// Row and column sums of a plan, keyed by the rows/columns actually used.
pub(crate) fn sparse_marginals<T: Scalar>(plan: &SparsePlan<T>) -> (Vec<(usize, T)>, Vec<(usize, T)>) {
    let mut rows: BTreeMap<usize, T> = BTreeMap::new();
    let mut cols: BTreeMap<usize, T> = BTreeMap::new();
    for (&(i, j), &v) in plan.entries() {
        *rows.entry(i).or_insert_with(T::zero) += v;
        *cols.entry(j).or_insert_with(T::zero) += v;
    }
    (rows.into_iter().collect(), cols.into_iter().collect())
}

/// `U(γ)` through the support-restricted expansion.
pub fn objective<T: Scalar>(instance: &ProblemInstance<T>, plan: &SparsePlan<T>) -> Result<T> {
    instance.check_support(plan.support())?;
    let l1 = instance.lambda1;
    let two = T::lit(2.0);
    let (r, s) = sparse_marginals(plan);

    let mut linear = T::zero();
    let mut sq = T::zero();
    for (&(i, j), &v) in plan.entries() {
        linear += instance.cost.get(i, j) * v;
        sq += v * v;
    }

    let side = |sums: &[(usize, T)], g: &GramMatrix<T>, pre: &[T]| -> T {
        let mut quad = T::zero();
        let mut cross = T::zero();
        for &(p, rp) in sums {
            let mut acc = T::zero();
            for &(q, rq) in sums {
                acc += g.get(p, q) * rq;
            }
            quad += rp * acc;
            cross += rp * pre[p];
        }
        quad - two * cross
    };

    let rows = side(&r, &instance.g1, &instance.a);
    let cols = side(&s, &instance.g2, &instance.b);
    Ok(linear + l1 * (rows + cols) + instance.lambda2 / two * sq + instance.const0)
}

/// Lazily evaluates partial derivatives of `U` at a fixed plan.
///
/// Row sums `γ1` and column sums `γᵀ1` are formed once; each requested entry
/// then costs `O(|I_S| + |J_S|)`, with the `G₁(γ1)` and `G₂(γᵀ1)` rows cached.
pub struct GradientOracle<'a, T> {
    instance: &'a ProblemInstance<T>,
    plan: &'a SparsePlan<T>,
    row_sums: Vec<(usize, T)>,
    col_sums: Vec<(usize, T)>,
    row_term: Vec<Option<T>>,
    col_term: Vec<Option<T>>,
    evaluations: usize,
}

impl<'a, T: Scalar> GradientOracle<'a, T> {
    pub fn new(instance: &'a ProblemInstance<T>, plan: &'a SparsePlan<T>) -> Result<Self> {
        instance.check_support(plan.support())?;
        let (row_sums, col_sums) = sparse_marginals(plan);
        Ok(GradientOracle {
            instance,
            plan,
            row_sums,
            col_sums,
            row_term: vec![None; instance.rows()],
            col_term: vec![None; instance.cols()],
            evaluations: 0,
        })
    }

    fn row_term(&mut self, i: usize) -> T {
        if let Some(v) = self.row_term[i] {
            return v;
        }
        let g = &self.instance.g1;
        let v = self.row_sums.iter().map(|&(p, r)| g.get(i, p) * r).sum::<T>() - self.instance.a[i];
        self.row_term[i] = Some(v);
        v
    }

    fn col_term(&mut self, j: usize) -> T {
        if let Some(v) = self.col_term[j] {
            return v;
        }
        let g = &self.instance.g2;
        let v = self.col_sums.iter().map(|&(q, s)| g.get(q, j) * s).sum::<T>() - self.instance.b[j];
        self.col_term[j] = Some(v);
        v
    }

    /// `∂U/∂γᵢⱼ`
    pub fn partial(&mut self, (i, j): Index) -> Result<T> {
        self.instance.check_index((i, j))?;
        self.evaluations += 1;
        let two = T::lit(2.0);
        let mass = self.plan.value_at((i, j));
        Ok(self.instance.cost.get(i, j)
            + two * self.instance.lambda1 * (self.row_term(i) + self.col_term(j))
            + self.instance.lambda2 * mass)
    }

    /// Number of partial derivatives requested so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }
}

/// `∂U/∂γᵤ` for every requested `u`, in the order given.
pub fn gradient<T: Scalar>(
    instance: &ProblemInstance<T>,
    plan: &SparsePlan<T>,
    at: &[Index],
) -> Result<Vec<T>> {
    let mut oracle = GradientOracle::new(instance, plan)?;
    at.iter().map(|&u| oracle.partial(u)).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    pub(crate) fn scalar_instance(c: f64) -> ProblemInstance<f64> {
        ProblemInstance::new(
            CostMatrix::from_matrix(DenseMatrix::from_rows(&[vec![c]]).unwrap()).unwrap(),
            GramMatrix::identity(1),
            GramMatrix::identity(1),
            DiscreteMeasure::new(vec![1.0]).unwrap(),
            DiscreteMeasure::new(vec![1.0]).unwrap(),
            1.0,
            0.0,
        )
        .unwrap()
    }

    fn single(v: f64) -> SparsePlan<f64> {
        SparsePlan::from_entries(vec![((0, 0), v)]).unwrap()
    }

    #[test]
    fn zero_plan_objective_is_const0() {
        let inst = scalar_instance(0.5);
        assert_eq!(objective(&inst, &SparsePlan::zero()).unwrap(), 2.0);
        assert_eq!(inst.const0(), 2.0);
    }

    #[test]
    fn scalar_objective_values() {
        let inst = scalar_instance(0.5);
        assert!((objective(&inst, &single(1.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((objective(&inst, &single(0.875)).unwrap() - 0.46875).abs() < 1e-15);
    }

    #[test]
    fn scalar_gradient_values() {
        let inst = scalar_instance(0.5);
        let g0 = gradient(&inst, &SparsePlan::zero(), &[(0, 0)]).unwrap();
        assert_eq!(g0[0], 0.5 - 4.0);
        assert_eq!(g0[0], inst.gradient_at_zero((0, 0)));
        let g = gradient(&inst, &single(0.875), &[(0, 0)]).unwrap();
        assert!(g[0].abs() < 1e-15);
    }

    #[test]
    fn out_of_range_is_input_error() {
        let inst = scalar_instance(0.5);
        let bad = SparsePlan::from_entries(vec![((1, 0), 1.0)]).unwrap();
        assert!(matches!(objective(&inst, &bad), Err(UotError::Input(_))));
        assert!(gradient(&inst, &SparsePlan::zero(), &[(0, 3)]).is_err());
    }

    #[test]
    fn lambda_validation() {
        let inst = scalar_instance(0.5);
        assert!(inst.with_lambdas(0.0, 0.0).is_err());
        assert!(inst.with_lambdas(1.0, -1.0).is_err());
    }
}
