//! Accelerated projected gradient descent on a fixed support.

use serde::Serialize;

use super::{Index, ProblemInstance, SparsePlan, SupportSet};
use crate::error::{Result, UotError};
use crate::linalg::{Cholesky, DenseMatrix};
use crate::scalar::Scalar;

/// Supports larger than this skip the active-set polish (its Cholesky is cubic in the free set).
const POLISH_MAX_SUPPORT: usize = 400;

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig<T> {
    pub max_iter: usize,
    /// Stop once the relative decrease of the objective falls below this.
    pub rel_tol: T,
    /// Entries above this count as non-sparse.
    pub support_tol: T,
    /// First-order residual below which a restricted solve is reported converged.
    pub kkt_tol: T,
    pub seed: u64,
    /// Failure probability for the stochastic candidate sampling, in (0, 1).
    pub epsilon: T,
    /// Stop a greedy run once every candidate gradient is at most `support_tol`.
    pub early_stop: bool,
    /// Finish each APGD run with an exact solve on the detected active set.
    pub polish: bool,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            max_iter: 1000,
            rel_tol: T::lit(1e-10),
            support_tol: T::lit(1e-12),
            kkt_tol: T::lit(1e-6),
            seed: 0,
            epsilon: T::lit(0.01),
            early_stop: false,
            polish: true,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(UotError::input("max_iter must be >= 1"));
        }
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("support_tol", self.support_tol),
            ("kkt_tol", self.kkt_tol),
        ] {
            if !(v > T::zero()) {
                return Err(UotError::input(format!("{name} must be > 0")));
            }
        }
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(UotError::input(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RestrictedSolution<T> {
    /// Values on every element of the requested support (zeros included).
    pub plan: SparsePlan<T>,
    pub objective: T,
    pub iterations: usize,
    /// `max |min(γᵤ, ∇U(γ)ᵤ)|` over the support.
    pub kkt_residual: T,
    pub converged: bool,
}

/// The objective seen as a quadratic in the support values only.
struct Restricted<'a, T> {
    inst: &'a ProblemInstance<T>,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    g1: DenseMatrix<T>,
    g2: DenseMatrix<T>,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
}

impl<'a, T: Scalar> Restricted<'a, T> {
    fn new(inst: &'a ProblemInstance<T>, elems: &[Index]) -> Self {
        let mut rows: Vec<usize> = elems.iter().map(|u| u.0).collect();
        rows.sort_unstable();
        rows.dedup();
        let mut cols: Vec<usize> = elems.iter().map(|u| u.1).collect();
        cols.sort_unstable();
        cols.dedup();
        let row_of = elems
            .iter()
            .map(|u| rows.binary_search(&u.0).expect("row present"))
            .collect();
        let col_of = elems
            .iter()
            .map(|u| cols.binary_search(&u.1).expect("col present"))
            .collect();
        let g1 = DenseMatrix::from_fn(rows.len(), rows.len(), |p, q| inst.g1().get(rows[p], rows[q]));
        let g2 = DenseMatrix::from_fn(cols.len(), cols.len(), |p, q| inst.g2().get(cols[p], cols[q]));
        let a = rows.iter().map(|&i| inst.a()[i]).collect();
        let b = cols.iter().map(|&j| inst.b()[j]).collect();
        let c = elems.iter().map(|&(i, j)| inst.cost().get(i, j)).collect();
        Restricted {
            inst,
            row_of,
            col_of,
            rows,
            cols,
            g1,
            g2,
            a,
            b,
            c,
        }
    }

    fn sums(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let mut r = vec![T::zero(); self.rows.len()];
        let mut s = vec![T::zero(); self.cols.len()];
        for (k, &v) in x.iter().enumerate() {
            r[self.row_of[k]] += v;
            s[self.col_of[k]] += v;
        }
        (r, s)
    }

    fn objective(&self, x: &[T]) -> T {
        let two = T::lit(2.0);
        let (r, s) = self.sums(x);
        let side = |g: &DenseMatrix<T>, v: &[T], pre: &[T]| -> T {
            let gv = g.mul_vec(v);
            v.iter()
                .zip(&gv)
                .zip(pre)
                .map(|((&vi, &gvi), &p)| vi * (gvi - two * p))
                .sum()
        };
        let mut lin = T::zero();
        let mut sq = T::zero();
        for (k, &v) in x.iter().enumerate() {
            lin += self.c[k] * v;
            sq += v * v;
        }
        lin + self.inst.lambda1() * (side(&self.g1, &r, &self.a) + side(&self.g2, &s, &self.b))
            + self.inst.lambda2() / two * sq
            + self.inst.const0()
    }

    fn gradient(&self, x: &[T], out: &mut [T]) {
        let two_l1 = T::lit(2.0) * self.inst.lambda1();
        let (r, s) = self.sums(x);
        let gr = self.g1.mul_vec(&r);
        let gs = self.g2.mul_vec(&s);
        for (k, o) in out.iter_mut().enumerate() {
            let (p, q) = (self.row_of[k], self.col_of[k]);
            *o = self.c[k]
                + two_l1 * (gr[p] - self.a[p] + gs[q] - self.b[q])
                + self.inst.lambda2() * x[k];
        }
    }

    fn kkt(&self, x: &[T]) -> T {
        let mut g = vec![T::zero(); x.len()];
        self.gradient(x, &mut g);
        x.iter()
            .zip(&g)
            .map(|(&v, &gk)| v.min(gk).abs())
            .fold(T::zero(), T::max)
    }

    /// Linear coefficient of the quadratic: the gradient at zero.
    fn linear_term(&self, k: usize) -> T {
        self.c[k] - T::lit(2.0) * self.inst.lambda1() * (self.a[self.row_of[k]] + self.b[self.col_of[k]])
    }

    fn hessian_entry(&self, k: usize, l: usize) -> T {
        let mut h = T::lit(2.0)
            * self.inst.lambda1()
            * (self.g1.get(self.row_of[k], self.row_of[l]) + self.g2.get(self.col_of[k], self.col_of[l]));
        if k == l {
            h += self.inst.lambda2();
        }
        h
    }

    /// Active-set refinement: solve the stationarity system on the positive
    /// entries, dropping negatives and adding violators until KKT holds.
    fn polish(&self, x: &[T], support_tol: T) -> Option<Vec<T>> {
        let n = x.len();
        let mut free: Vec<bool> = x.iter().map(|&v| v > support_tol).collect();
        let q: Vec<T> = (0..n).map(|k| self.linear_term(k)).collect();
        let scale = q.iter().fold(T::one(), |m, v| m.max(v.abs()));
        let thr = T::epsilon().sqrt() * T::lit(1e-4) * scale;
        let mut grad = vec![T::zero(); n];
        for _ in 0..(2 * n + 2) {
            let idx: Vec<usize> = (0..n).filter(|&k| free[k]).collect();
            let mut cand = vec![T::zero(); n];
            if !idx.is_empty() {
                let h = DenseMatrix::from_fn(idx.len(), idx.len(), |p, r| self.hessian_entry(idx[p], idx[r]));
                let chol = Cholesky::factor_shifted(&h, T::zero())?;
                let rhs: Vec<T> = idx.iter().map(|&k| -q[k]).collect();
                let sol = chol.solve(&rhs);
                if sol.iter().any(|v| !v.is_finite()) {
                    return None;
                }
                if sol.iter().any(|&v| v < T::zero()) {
                    for (&k, &v) in idx.iter().zip(&sol) {
                        if v < T::zero() {
                            free[k] = false;
                        }
                    }
                    continue;
                }
                for (&k, &v) in idx.iter().zip(&sol) {
                    cand[k] = v;
                }
            }
            self.gradient(&cand, &mut grad);
            let worst = (0..n)
                .filter(|&k| !free[k] && grad[k] < -thr)
                .min_by(|&a, &b| grad[a].partial_cmp(&grad[b]).expect("finite gradient"));
            match worst {
                Some(k) => free[k] = true,
                None => return Some(cand),
            }
        }
        None
    }
}

/// Minimizes `U` over plans supported in `support`.
///
/// FISTA with step `1/L`, `L = 2λ₁(n·e₁¹ + m·e₁²) + λ₂`, nonnegative projection and
/// restart whenever the objective increases.
pub fn solve_restricted<T: Scalar>(
    instance: &ProblemInstance<T>,
    support: &SupportSet,
    warm_start: Option<&SparsePlan<T>>,
    config: &SolverConfig<T>,
) -> Result<RestrictedSolution<T>> {
    config.validate()?;
    instance.check_support(support)?;
    if support.is_empty() {
        return Ok(RestrictedSolution {
            plan: SparsePlan::zero(),
            objective: instance.const0(),
            iterations: 0,
            kkt_residual: T::zero(),
            converged: true,
        });
    }
    let prob = Restricted::new(instance, support.as_slice());
    let n_var = support.len();
    let (m, n) = (T::of_usize(instance.rows()), T::of_usize(instance.cols()));
    let lipschitz = T::lit(2.0) * instance.lambda1() * (n * instance.g1().eig_max() + m * instance.g2().eig_max())
        + instance.lambda2();
    if !(lipschitz > T::zero()) || !lipschitz.is_finite() {
        return Err(UotError::numerical(format!("invalid Lipschitz constant {lipschitz}")));
    }
    let step = T::one() / lipschitz;

    let mut x: Vec<T> = match warm_start {
        Some(w) => support.iter().map(|&u| w.value_at(u).max(T::zero())).collect(),
        None => vec![T::zero(); n_var],
    };
    let mut obj = prob.objective(&x);
    if !(obj <= instance.const0()) {
        x.iter_mut().for_each(|v| *v = T::zero());
        obj = instance.const0();
    }

    let mut y = x.clone();
    let mut t = T::one();
    let mut grad = vec![T::zero(); n_var];
    let mut xn = vec![T::zero(); n_var];
    let mut just_restarted = false;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        prob.gradient(&y, &mut grad);
        for k in 0..n_var {
            xn[k] = (y[k] - step * grad[k]).max(T::zero());
        }
        let on = prob.objective(&xn);
        if !on.is_finite() {
            return Err(UotError::numerical("objective became non-finite during APGD"));
        }
        if on > obj {
            if just_restarted {
                // a plain projected step from x failed to descend: rounding floor
                break;
            }
            t = T::one();
            y.copy_from_slice(&x);
            just_restarted = true;
            continue;
        }
        just_restarted = false;
        let tn = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
        let beta = (t - T::one()) / tn;
        for k in 0..n_var {
            y[k] = xn[k] + beta * (xn[k] - x[k]);
        }
        let decrease = obj - on;
        x.copy_from_slice(&xn);
        obj = on;
        t = tn;
        if decrease <= config.rel_tol * on.abs() {
            break;
        }
    }

    let mut kkt = prob.kkt(&x);
    if config.polish && n_var <= POLISH_MAX_SUPPORT {
        if let Some(p) = prob.polish(&x, config.support_tol) {
            let po = prob.objective(&p);
            let pk = prob.kkt(&p);
            if po <= obj + T::epsilon() * T::lit(16.0) * obj.abs().max(T::one()) && pk <= kkt {
                x = p;
                obj = po.min(obj);
                kkt = pk;
            }
        }
    }

    Ok(RestrictedSolution {
        plan: SparsePlan::new(support.clone(), x)?,
        objective: obj,
        iterations,
        kkt_residual: kkt,
        converged: kkt <= config.kkt_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::objective;
    use crate::problem::tests::scalar_instance;

    fn cfg() -> SolverConfig<f64> {
        SolverConfig::default()
    }

    fn one() -> SupportSet {
        SupportSet::from_elements(vec![(0, 0)]).unwrap()
    }

    #[test]
    fn scalar_analytic_minimizer() {
        let inst = scalar_instance(0.5);
        let sol = solve_restricted(&inst, &one(), None, &cfg()).unwrap();
        assert!((sol.plan.value_at((0, 0)) - 0.875).abs() < 1e-12);
        assert!((sol.objective - 0.46875).abs() < 1e-12);
        assert!(sol.converged);
    }

    #[test]
    fn scalar_projection_active() {
        let inst = scalar_instance(5.0);
        let sol = solve_restricted(&inst, &one(), None, &cfg()).unwrap();
        assert_eq!(sol.plan.value_at((0, 0)), 0.0);
        assert_eq!(sol.objective, inst.const0());
    }

    #[test]
    fn empty_support_gives_zero_plan() {
        let inst = scalar_instance(0.5);
        let sol = solve_restricted(&inst, &SupportSet::new(), None, &cfg()).unwrap();
        assert!(sol.plan.support().is_empty());
        assert_eq!(sol.objective, inst.const0());
    }

    #[test]
    fn unpolished_apgd_still_converges() {
        let inst = scalar_instance(0.5);
        let c = SolverConfig {
            polish: false,
            ..cfg()
        };
        let sol = solve_restricted(&inst, &one(), None, &c).unwrap();
        assert!((sol.plan.value_at((0, 0)) - 0.875).abs() < 1e-6);
        assert!((objective(&inst, &sol.plan).unwrap() - sol.objective).abs() < 1e-14);
    }

    #[test]
    fn bad_warm_start_is_discarded() {
        let inst = scalar_instance(0.5);
        let warm = SparsePlan::from_entries(vec![((0, 0), 1e6)]).unwrap();
        let sol = solve_restricted(&inst, &one(), Some(&warm), &cfg()).unwrap();
        assert!((sol.plan.value_at((0, 0)) - 0.875).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig::<f64> {
            max_iter: 0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig::<f64> {
            epsilon: 1.0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
    }
}
