use serde::Serialize;

use super::ProblemInstance;
use crate::geometry::DEGENERACY_TOL;
use crate::scalar::Scalar;

/// Eigenvalue-based curvature bounds of `−U` and the submodularity-ratio bound they imply.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvatureDiagnostics<T> {
    /// Sparsity level `K` the bounds were requested for.
    pub sparsity: usize,
    /// Restricted strong concavity: `λ₁(e₀¹n + e₀²m) + λ₂/2`.
    pub u_lower: T,
    /// One-coordinate smoothness: `2λ₁ maxᵢⱼ((G₁)ᵢᵢ + (G₂)ⱼⱼ) + λ₂`.
    pub u_tilde1: T,
    /// `min(1, u_lower / u_tilde1)`
    pub alpha_lower: T,
    /// False when a Gram matrix is numerically singular and `u_lower` is meaningless.
    pub reliable: bool,
}

pub fn curvature<T: Scalar>(instance: &ProblemInstance<T>, sparsity: usize) -> CurvatureDiagnostics<T> {
    let (m, n) = (T::of_usize(instance.rows()), T::of_usize(instance.cols()));
    let (g1, g2) = (instance.g1(), instance.g2());
    let l1 = instance.lambda1();
    let l2 = instance.lambda2();
    let u_lower = l1 * (g1.eig_min() * n + g2.eig_min() * m) + l2 / T::lit(2.0);
    let d1 = (0..g1.size()).map(|i| g1.get(i, i)).fold(T::neg_infinity(), T::max);
    let d2 = (0..g2.size()).map(|j| g2.get(j, j)).fold(T::neg_infinity(), T::max);
    let u_tilde1 = T::lit(2.0) * l1 * (d1 + d2) + l2;
    let tol = T::lit(DEGENERACY_TOL);
    let reliable = g1.eig_min() > tol && g2.eig_min() > tol && u_lower > T::zero();
    CurvatureDiagnostics {
        sparsity,
        u_lower,
        u_tilde1,
        alpha_lower: (u_lower / u_tilde1).min(T::one()),
        reliable,
    }
}
