//! Structured-sparse unbalanced optimal transport with MMD marginal penalties.
//!
//! Supports are grown greedily (classical greedy, OMP, stochastic OMP, matroid OMP);
//! each candidate support is scored by an exact restricted convex solve, and
//! column-sparse plans can be certified with a duality gap.
//!
//! The core is generic over [`Scalar`] (`f32` or `f64`); the `*64` / `*32`
//! aliases below fix the scalar type.

pub mod duality;
pub mod error;
pub mod geometry;
pub mod greedy;
pub mod linalg;
pub mod matroid;
pub mod problem;
pub mod scalar;

pub use duality::{
    dual_certificate, dual_objective, duality_gap, primal_objective, sparse_conjugate, ConjugateResult,
    DualCertificate, PrimalValue,
};
pub use error::{Result, UotError};
pub use geometry::{
    cost_matrix, cross_kernel, gram_matrix, kernel_eval, median_heuristic, squared_distance, CostKind, CostMatrix,
    DiscreteMeasure, GramMatrix, KernelFamily, KernelSpec, PointCloud,
};
pub use greedy::{
    classical_greedy, matroid_omp, matroid_omp_with_pick, omp_greedy, stochastic_omp, BasePick, GreedyOutcome,
    GreedyTrace, TraceStep,
};
pub use linalg::DenseMatrix;
pub use matroid::{MatroidConstraint, MatroidKind};
pub use problem::{
    curvature, gradient, objective, set_function_value, solve_restricted, CurvatureDiagnostics, GradientOracle,
    Index, ProblemInstance, RestrictedSolution, SetFunction, SolverConfig, SparsePlan, SupportSet,
};
pub use scalar::Scalar;

pub type ProblemInstance64 = ProblemInstance<f64>;
pub type ProblemInstance32 = ProblemInstance<f32>;
pub type SparsePlan64 = SparsePlan<f64>;
pub type SparsePlan32 = SparsePlan<f32>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type DiscreteMeasure64 = DiscreteMeasure<f64>;
pub type DiscreteMeasure32 = DiscreteMeasure<f32>;
pub type GramMatrix64 = GramMatrix<f64>;
pub type GramMatrix32 = GramMatrix<f32>;
pub type CostMatrix64 = CostMatrix<f64>;
pub type CostMatrix32 = CostMatrix<f32>;
pub type KernelSpec64 = KernelSpec<f64>;
pub type KernelSpec32 = KernelSpec<f32>;
pub type GreedyOutcome64 = GreedyOutcome<f64>;
pub type GreedyOutcome32 = GreedyOutcome<f32>;
pub type DualCertificate64 = DualCertificate<f64>;
pub type DualCertificate32 = DualCertificate<f32>;
