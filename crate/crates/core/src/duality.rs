//! Column-sparse primal/dual pair and the duality-gap certificate of a plan.
//!
//! With `Θ(z) = (λ₂/2)‖z‖² + δ(‖z‖₀ ≤ K, z ≥ 0)` applied to each column, the primal is
//!
//! ```text
//! P(γ) = ⟨C, γ⟩ + Σⱼ Θ(γⱼ) + λ₁(‖γ1 − μ‖²_G₁ + ‖γᵀ1 − ν‖²_G₂)
//! D(α, β) = ⟨α, μ⟩ + ⟨β, ν⟩ − αᵀG₁⁻¹α/4λ₁ − βᵀG₂⁻¹β/4λ₁ − Σⱼ Θ*(α + βⱼ1 − Cⱼ)
//! ```
//!
//! and `P(γ) ≥ D(α, β)` for every feasible pair.

use serde::Serialize;

use crate::error::{Result, UotError};
use crate::linalg::{dot, Cholesky};
use crate::problem::{objective, sparse_marginals, ProblemInstance, SparsePlan};
use crate::scalar::Scalar;

/// Entries at or below this value do not count towards a column's cardinality.
pub const COLUMN_SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateResult<T> {
    pub value: T,
    pub maximizer: Vec<T>,
}

/// `Θ*(w) = max { ⟨w, z⟩ − (λ₂/2)‖z‖² : z ≥ 0, ‖z‖₀ ≤ K }`.
///
/// The maximizer keeps the `K` largest entries of `w` (ties by lowest index), clipped at zero and scaled by `1/λ₂`.
pub fn sparse_conjugate<T: Scalar>(w: &[T], k: usize, lambda2: T) -> Result<ConjugateResult<T>> {
    if !(lambda2 > T::zero()) {
        return Err(UotError::CertificateUnavailable(
            "the sparse conjugate is unbounded unless lambda2 > 0".into(),
        ));
    }
    if k == 0 || k > w.len() {
        return Err(UotError::input(format!(
            "conjugate sparsity must lie in [1, {}], got {k}",
            w.len()
        )));
    }
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&x, &y| w[y].partial_cmp(&w[x]).unwrap_or(std::cmp::Ordering::Equal).then(x.cmp(&y)));
    let mut maximizer = vec![T::zero(); w.len()];
    let mut sum_sq = T::zero();
    for &p in order.iter().take(k) {
        let clipped = w[p].max(T::zero());
        maximizer[p] = clipped / lambda2;
        sum_sq += clipped * clipped;
    }
    Ok(ConjugateResult {
        value: sum_sq / (T::lit(2.0) * lambda2),
        maximizer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalValue<T> {
    /// `U(γ)`; the true primal is this value when feasible and `+∞` otherwise.
    pub value: T,
    pub feasible: bool,
    /// `(column, count)` of the first column with the most entries, when that exceeds `K₂`.
    pub violation: Option<(usize, usize)>,
}

impl<T: Scalar> PrimalValue<T> {
    pub fn or_infinity(&self) -> T {
        if self.feasible {
            self.value
        } else {
            T::infinity()
        }
    }
}

pub fn primal_objective<T: Scalar>(
    instance: &ProblemInstance<T>,
    plan: &SparsePlan<T>,
    k2: usize,
) -> Result<PrimalValue<T>> {
    let value = objective(instance, plan)?;
    let violation = plan
        .max_column_count(T::lit(COLUMN_SUPPORT_TOL))
        .filter(|&(_, count)| count > k2);
    Ok(PrimalValue {
        value,
        feasible: violation.is_none(),
        violation,
    })
}

fn require_dual_lambdas<T: Scalar>(instance: &ProblemInstance<T>) -> Result<()> {
    if !(instance.lambda2() > T::zero()) {
        return Err(UotError::CertificateUnavailable("lambda2 must be positive".into()));
    }
    if !(instance.lambda1() > T::zero()) {
        return Err(UotError::CertificateUnavailable("lambda1 must be positive".into()));
    }
    Ok(())
}

pub fn dual_objective<T: Scalar>(instance: &ProblemInstance<T>, alpha: &[T], beta: &[T], k2: usize) -> Result<T> {
    require_dual_lambdas(instance)?;
    let (m, n) = (instance.rows(), instance.cols());
    if alpha.len() != m || beta.len() != n {
        return Err(UotError::dimension(format!(
            "dual variables must have lengths ({m}, {n}), got ({}, {})",
            alpha.len(),
            beta.len()
        )));
    }
    let l1 = instance.lambda1();
    let l2 = instance.lambda2();
    let four_l1 = T::lit(4.0) * l1;
    let f1 = Cholesky::factor_with_jitter(instance.g1().matrix())?;
    let f2 = Cholesky::factor_with_jitter(instance.g2().matrix())?;

    let mut value = dot(alpha, instance.mu().weights()) + dot(beta, instance.nu().weights())
        - f1.inverse_quad_form(alpha) / four_l1
        - f2.inverse_quad_form(beta) / four_l1;
    let cost = instance.cost();
    let mut w = vec![T::zero(); m];
    for (j, &bj) in beta.iter().enumerate() {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = alpha[i] + bj - cost.get(i, j);
        }
        value -= sparse_conjugate(&w, k2, l2)?.value;
    }
    if !value.is_finite() {
        return Err(UotError::numerical("dual objective is not finite"));
    }
    Ok(value)
}

/// `α = 2λ₁G₁(μ − γ1)`, `β = 2λ₁G₂(ν − γᵀ1)`.
pub fn dual_certificate<T: Scalar>(instance: &ProblemInstance<T>, plan: &SparsePlan<T>) -> Result<(Vec<T>, Vec<T>)> {
    instance.check_support(plan.support())?;
    let two_l1 = T::lit(2.0) * instance.lambda1();
    let (r, s) = sparse_marginals(plan);
    // G(μ − r) = a − G r, touching only the used rows/columns of G
    let side = |pre: &[T], g: &crate::geometry::GramMatrix<T>, sums: &[(usize, T)]| -> Vec<T> {
        (0..pre.len())
            .map(|p| {
                let gr: T = sums.iter().map(|&(q, v)| g.get(p, q) * v).sum();
                two_l1 * (pre[p] - gr)
            })
            .collect()
    };
    Ok((side(instance.a(), instance.g1(), &r), side(instance.b(), instance.g2(), &s)))
}

#[derive(Debug, Clone, Serialize)]
pub struct DualCertificate<T> {
    pub primal: T,
    pub dual: T,
    pub gap: T,
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub feasible: bool,
}

pub fn duality_gap<T: Scalar>(
    instance: &ProblemInstance<T>,
    plan: &SparsePlan<T>,
    k2: usize,
) -> Result<DualCertificate<T>> {
    require_dual_lambdas(instance)?;
    if k2 == 0 || k2 > instance.rows() {
        return Err(UotError::input(format!(
            "per-column sparsity must lie in [1, {}], got {k2}",
            instance.rows()
        )));
    }
    let primal = primal_objective(instance, plan, k2)?;
    if let Some((column, count)) = primal.violation {
        return Err(UotError::Infeasible {
            column,
            count,
            limit: k2,
        });
    }
    let (alpha, beta) = dual_certificate(instance, plan)?;
    let dual = dual_objective(instance, &alpha, &beta, k2)?;
    Ok(DualCertificate {
        primal: primal.value,
        dual,
        gap: primal.value - dual,
        alpha,
        beta,
        feasible: true,
    })
}
