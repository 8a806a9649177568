mod common;

use common::*;
use sparse_uot::{
    dual_certificate, duality_gap, matroid_omp, KernelFamily, MatroidConstraint, SolverConfig, SparsePlan, UotError,
};

#[test]
fn vacuous_column_constraint_closes_the_gap() {
    for (seed, l1) in [(1u64, 0.1), (2, 1.0), (3, 10.0)] {
        let inst = random_instance(seed, 4, 5, KernelFamily::Rbf, 1.0, l1, 0.1);
        let matroid = MatroidConstraint::partition(4, 4, 5).unwrap();
        let out = matroid_omp(&inst, &matroid, &SolverConfig::default()).unwrap();
        assert!(out.trace.all_converged());
        let cert = duality_gap(&inst, &out.plan, 4).unwrap();
        assert!(cert.gap >= -1e-9 && cert.gap <= 1e-6, "lambda1 {l1}: gap {}", cert.gap);
    }
}

#[test]
fn zero_plan_has_positive_gap_and_closed_form_duals() {
    let inst = random_instance(4, 3, 3, KernelFamily::Imq, 1.0, 1.0, 0.5);
    let cert = duality_gap(&inst, &SparsePlan::zero(), 2).unwrap();
    assert!(cert.gap > 0.0);
    let (alpha, beta) = dual_certificate(&inst, &SparsePlan::zero()).unwrap();
    for (x, a) in alpha.iter().zip(inst.a()) {
        assert!((x - 2.0 * a).abs() < 1e-15);
    }
    for (y, b) in beta.iter().zip(inst.b()) {
        assert!((y - 2.0 * b).abs() < 1e-15);
    }
    assert_eq!(cert.alpha, alpha);
}

#[test]
fn infeasible_plan_names_the_column() {
    let inst = random_instance(6, 3, 2, KernelFamily::Rbf, 1.0, 1.0, 0.5);
    let plan = SparsePlan::from_entries(vec![((0, 1), 0.2), ((2, 1), 0.1), ((1, 0), 0.3)]).unwrap();
    match duality_gap(&inst, &plan, 1) {
        Err(UotError::Infeasible { column, count, limit }) => assert_eq!((column, count, limit), (1, 2, 1)),
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn certificate_serializes_with_named_fields() {
    let inst = random_instance(7, 2, 2, KernelFamily::Rbf, 1.0, 1.0, 0.5);
    let cert = duality_gap(&inst, &SparsePlan::zero(), 1).unwrap();
    let json = serde_json::to_value(&cert).unwrap();
    for key in ["primal", "dual", "gap", "alpha", "beta", "feasible"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}
