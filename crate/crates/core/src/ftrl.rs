//! The per-round regularized program
//! `min η⟨x, L⟩ − Σᵢ √xᵢ` over the (augmented) flow polytope, and the default
//! learning-rate and exploration schedules.

use crate::augment::{augmented_constraints, BitIndexMap, LinearEquality};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::linalg::{Slot, SparseCholesky};

/// Positivity floor applied to iterates.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Total iteration cap shared by Newton and fallback steps.
pub const MAX_ITERATIONS: usize = 10_000;
/// Feasibility required of a returned point.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// Value, gradient and Hessian diagonal of `F(x) = −Σ √xᵢ`.
pub fn regularizer_value_grad_hess(x: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveCoordinate { index, value });
    }
    let value = -x.iter().map(|v| v.sqrt()).sum::<f64>();
    let grad = x.iter().map(|v| -0.5 / v.sqrt()).collect();
    let hess = x.iter().map(|v| 0.25 / (v * v.sqrt())).collect();
    Ok((value, grad, hess))
}

/// Constraint description of the (augmented) flow polytope of a pruned DAG.
#[derive(Debug, Clone)]
pub struct FtrlDomain {
    dag: Dag,
    bits: Option<BitIndexMap>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    plan: Vec<Vec<(Slot, f64)>>,
    chol: SparseCholesky,
}

impl FtrlDomain {
    /// Builds the domain. With `bits` the live bit coordinates follow `V ∪ E`.
    ///
    /// The sink equation `x[t] = 1` is implied by the others and left out so
    /// that the constraint rows are linearly independent.
    pub fn new(dag: Dag, bits: Option<BitIndexMap>) -> Result<Self> {
        if !dag.is_pruned() {
            return Err(Error::param("dag", "the domain needs a pruned graph"));
        }
        let n = dag.num_vertices();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![vec![(dag.source(), 1.0)]];
        let mut rhs = vec![1.0];
        for v in 0..n {
            if v != dag.source() {
                let mut r = vec![(v, 1.0)];
                r.extend(dag.in_edges(v).iter().map(|&e| (dag.edge_coord(e), -1.0)));
                rows.push(r);
                rhs.push(0.0);
            }
            if v != dag.sink() {
                let mut r = vec![(v, 1.0)];
                r.extend(dag.out_edges(v).iter().map(|&e| (dag.edge_coord(e), -1.0)));
                rows.push(r);
                rhs.push(0.0);
            }
        }
        if let Some(map) = &bits {
            for c in augmented_constraints(&dag, map) {
                rows.push(c.terms);
                rhs.push(c.rhs);
            }
        }
        let dim = dag.dim() + bits.as_ref().map_or(0, BitIndexMap::num_bits);
        let mut cols = vec![Vec::new(); dim];
        for (r, row) in rows.iter().enumerate() {
            for &(i, a) in row {
                cols[i].push((r, a));
            }
        }
        let pairs = cols.iter().flat_map(|c| {
            c.iter()
                .flat_map(move |&(r, _)| c.iter().map(move |&(k, _)| (r, k)))
        });
        let chol = SparseCholesky::analyze(rows.len(), pairs);
        let plan = cols
            .iter()
            .map(|c| {
                let mut p = Vec::new();
                for (a, &(r, ar)) in c.iter().enumerate() {
                    for &(k, ak) in &c[..=a] {
                        p.push((chol.slot(r, k), ar * ak));
                    }
                }
                p
            })
            .collect();
        Ok(FtrlDomain {
            dag,
            bits,
            rows,
            rhs,
            cols,
            plan,
            chol,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn bits(&self) -> Option<&BitIndexMap> {
        self.bits.as_ref()
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// The equalities describing the domain.
    pub fn constraints(&self) -> Vec<LinearEquality> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(t, &rhs)| LinearEquality {
                terms: t.clone(),
                rhs,
            })
            .collect()
    }

    /// Largest equality violation, including the implied sink equation.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let r = self.row_residual(x).iter().fold(0.0f64, |a, b| a.max(b.abs()));
        r.max((x[self.dag.sink()] - 1.0).abs())
    }

    fn row_residual(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &b)| b - row.iter().map(|&(i, a)| a * x[i]).sum::<f64>())
            .collect()
    }

    fn mul_a(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(i, a)| a * x[i]).sum())
            .collect()
    }

    fn mul_at(&self, y: &[f64]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|c| c.iter().map(|&(r, a)| a * y[r]).sum())
            .collect()
    }

    /// Strictly positive feasible point: the marginals of the uniform
    /// distribution over paths.
    pub fn interior_point(&self) -> Vec<f64> {
        let dag = &self.dag;
        // Log of the number of paths from each vertex to the sink.
        let mut logc = vec![f64::NEG_INFINITY; dag.num_vertices()];
        logc[dag.sink()] = 0.0;
        for &v in dag.topo_order().iter().rev() {
            let outs: Vec<f64> = dag
                .out_edges(v)
                .iter()
                .map(|&e| logc[dag.edge(e).1])
                .collect();
            if !outs.is_empty() {
                let m = outs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                logc[v] = m + outs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
            }
        }
        let mut x = vec![0.0; self.dim()];
        x[dag.source()] = 1.0;
        for &v in dag.topo_order() {
            for &e in dag.out_edges(v) {
                let w = dag.edge(e).1;
                let f = x[v] * (logc[w] - logc[v]).exp();
                x[dag.edge_coord(e)] = f;
                x[w] += f;
            }
        }
        if let Some(map) = &self.bits {
            for j in 0..map.num_bits() {
                x[dag.dim() + j] = map
                    .supporting_edges(j)
                    .iter()
                    .map(|&e| x[dag.edge_coord(e)])
                    .sum();
            }
        }
        x
    }
}

/// A converged solution and its diagnostics.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm of the last Newton step.
    pub last_step: f64,
    pub residual: f64,
}

/// Reusable solver workspace for one domain.
#[derive(Debug, Clone)]
pub struct Solver {
    chol: SparseCholesky,
    /// Factor of `A Aᵀ` for the projected-gradient fallback.
    proj: Option<SparseCholesky>,
}

fn objective(eta: f64, l: &[f64], x: &[f64]) -> f64 {
    x.iter()
        .zip(l)
        .map(|(&xi, &li)| eta * li * xi - xi.sqrt())
        .sum()
}

impl Solver {
    pub fn new(domain: &FtrlDomain) -> Self {
        Solver {
            chol: domain.chol.clone(),
            proj: None,
        }
    }

    /// Minimizes `η⟨x, L⟩ − Σ √xᵢ` over the domain, starting from `start`
    /// (a strictly positive, nearly feasible point). The result is within
    /// `tol` of the minimizer in sup-norm up to second-order terms.
    pub fn solve(
        &mut self,
        domain: &FtrlDomain,
        cumulative: &[f64],
        eta: f64,
        tol: f64,
        start: &[f64],
    ) -> Result<SolveOutcome> {
        let dim = domain.dim();
        for (got, expected) in [(cumulative.len(), dim), (start.len(), dim)] {
            if got != expected {
                return Err(Error::DimensionMismatch { expected, got });
            }
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::param("eta", format!("must be positive, got {eta}")));
        }
        if !(tol > 0.0) {
            return Err(Error::param("tol", format!("must be positive, got {tol}")));
        }
        let mut x: Vec<f64> = start.iter().map(|&v| v.max(POSITIVITY_FLOOR)).collect();
        let stop = (0.1 * tol).max(1e-15);
        let mut it = 0;
        let mut last_step = f64::INFINITY;
        let mut fallback_rounds = 0;
        let mut prev_full = f64::INFINITY;
        let mut stalls = 0;
        while it < MAX_ITERATIONS {
            it += 1;
            match self.newton_step(domain, cumulative, eta, &x) {
                Some(step) => {
                    let size = step.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                    last_step = size;
                    let (alpha, accepted) = line_search(eta, cumulative, &x, &step, size);
                    if accepted {
                        for (xi, di) in x.iter_mut().zip(&step) {
                            *xi = (*xi + alpha * di).max(POSITIVITY_FLOOR);
                        }
                        // Below the rounding floor of the KKT system further
                        // steps only move noise around; successive full steps
                        // that stop shrinking mean the floor has been reached.
                        let floor = noise_floor(eta, cumulative, &x);
                        let stagnant = alpha == 1.0 && size < 1e-7 && size > 0.5 * prev_full;
                        stalls = if stagnant { stalls + 1 } else { 0 };
                        if alpha == 1.0 {
                            prev_full = size;
                        }
                        if alpha == 1.0 && (size <= stop.max(floor) || stalls >= 3) {
                            let residual = domain.residual(&x);
                            if residual <= FEASIBILITY_TOL {
                                return Ok(SolveOutcome {
                                    x,
                                    iterations: it,
                                    last_step,
                                    residual,
                                });
                            }
                        }
                        continue;
                    }
                }
                None => {}
            }
            // Newton made no progress: take projected-gradient steps.
            fallback_rounds += 1;
            let budget = (50 * fallback_rounds).min(MAX_ITERATIONS - it);
            it += self.gradient_steps(domain, cumulative, eta, &mut x, budget)?;
        }
        Err(Error::SolverStall {
            iterations: it,
            step: last_step,
            tol,
        })
    }

    fn newton_step(
        &mut self,
        domain: &FtrlDomain,
        l: &[f64],
        eta: f64,
        x: &[f64],
    ) -> Option<Vec<f64>> {
        let g: Vec<f64> = x
            .iter()
            .zip(l)
            .map(|(&xi, &li)| eta * li - 0.5 / xi.sqrt())
            .collect();
        let d: Vec<f64> = x.iter().map(|&xi| 4.0 * xi * xi.sqrt()).collect();
        self.chol.clear();
        for (i, plan) in domain.plan.iter().enumerate() {
            for &(slot, a) in plan {
                self.chol.add(slot, a * d[i]);
            }
        }
        if !self.chol.factor() {
            return None;
        }
        let r = domain.row_residual(x);
        let dg: Vec<f64> = d.iter().zip(&g).map(|(a, b)| a * b).collect();
        let adg = domain.mul_a(&dg);
        let rhs: Vec<f64> = r.iter().zip(&adg).map(|(a, b)| -a - b).collect();
        let mut nu = self.chol.solve(&rhs);
        // One step of iterative refinement.
        let s_nu = {
            let at = domain.mul_at(&nu);
            let dat: Vec<f64> = at.iter().zip(&d).map(|(a, b)| a * b).collect();
            domain.mul_a(&dat)
        };
        let corr_rhs: Vec<f64> = rhs.iter().zip(&s_nu).map(|(a, b)| a - b).collect();
        let corr = self.chol.solve(&corr_rhs);
        nu.iter_mut().zip(corr).for_each(|(a, b)| *a += b);
        let at = domain.mul_at(&nu);
        let step: Vec<f64> = (0..x.len()).map(|i| -d[i] * (g[i] + at[i])).collect();
        if step.iter().all(|v| v.is_finite()) {
            Some(step)
        } else {
            None
        }
    }

    fn gradient_steps(
        &mut self,
        domain: &FtrlDomain,
        l: &[f64],
        eta: f64,
        x: &mut Vec<f64>,
        budget: usize,
    ) -> Result<usize> {
        if self.proj.is_none() {
            let mut c = domain.chol.clone();
            c.clear();
            for plan in &domain.plan {
                for &(slot, a) in plan {
                    c.add(slot, a);
                }
            }
            if !c.factor() {
                return Err(Error::Infeasible);
            }
            self.proj = Some(c);
        }
        let proj = self.proj.as_ref().unwrap();
        let project = |v: &[f64]| -> Vec<f64> {
            let y = proj.solve(&domain.mul_a(v));
            let aty = domain.mul_at(&y);
            v.iter().zip(aty).map(|(a, b)| a - b).collect()
        };
        let mut step_size = 1e-2;
        for k in 0..budget {
            // Restore feasibility, then move along the projected gradient.
            let r = domain.row_residual(x);
            let fix = domain.mul_at(&proj.solve(&r));
            for (xi, f) in x.iter_mut().zip(fix) {
                *xi = (*xi + f).max(POSITIVITY_FLOOR);
            }
            let g: Vec<f64> = x
                .iter()
                .zip(l)
                .map(|(&xi, &li)| eta * li - 0.5 / xi.sqrt())
                .collect();
            let dir: Vec<f64> = project(&g).into_iter().map(|v| -v).collect();
            let f0 = objective(eta, l, x);
            let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                return Ok(k + 1);
            }
            let mut t: f64 = step_size;
            for (xi, di) in x.iter().zip(&dir) {
                if *di < 0.0 {
                    t = t.min(0.5 * xi / -di);
                }
            }
            loop {
                let cand: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                if objective(eta, l, &cand) <= f0 + 1e-4 * t * slope {
                    *x = cand;
                    step_size = (2.0 * t).min(1.0);
                    break;
                }
                t *= 0.5;
                if t < 1e-300 {
                    return Ok(k + 1);
                }
            }
        }
        Ok(budget)
    }
}

/// Size of a Newton step produced by rounding alone: the gradient carries
/// relative error about `ε` in each term and the step scales it by
/// `4 x^{3/2}`.
fn noise_floor(eta: f64, l: &[f64], x: &[f64]) -> f64 {
    x.iter()
        .zip(l)
        .map(|(&xi, &li)| 4.0 * xi * xi.sqrt() * ((eta * li).abs() + 0.5 / xi.sqrt()))
        .fold(0.0, f64::max)
        * 16.0
        * f64::EPSILON
}

fn line_search(eta: f64, l: &[f64], x: &[f64], step: &[f64], size: f64) -> (f64, bool) {
    let mut alpha: f64 = 1.0;
    for (xi, di) in x.iter().zip(step) {
        if *di < 0.0 {
            alpha = alpha.min(0.99 * xi / -di);
        }
    }
    let slope: f64 = x
        .iter()
        .zip(l)
        .zip(step)
        .map(|((&xi, &li), &di)| (eta * li - 0.5 / xi.sqrt()) * di)
        .sum();
    // Close to the optimum the decrease drowns in rounding; take the step.
    let scale: f64 = x
        .iter()
        .zip(l)
        .map(|(&xi, &li)| (eta * li * xi).abs() + xi.sqrt())
        .sum();
    if alpha == 1.0 && (size < 1e-7 || -slope <= 1e3 * f64::EPSILON * scale) {
        return (1.0, true);
    }
    if !(slope < 0.0) {
        return (0.0, false);
    }
    let f0 = objective(eta, l, x);
    for _ in 0..60 {
        let cand: Vec<f64> = x.iter().zip(step).map(|(a, b)| a + alpha * b).collect();
        if objective(eta, l, &cand) <= f0 + 1e-4 * alpha * slope {
            return (alpha, true);
        }
        alpha *= 0.5;
    }
    (0.0, false)
}

/// One-shot solve from the uniform-path interior point.
pub fn solve(
    domain: &FtrlDomain,
    cumulative: &[f64],
    eta: f64,
    tol: f64,
) -> Result<SolveOutcome> {
    let start = domain.interior_point();
    Solver::new(domain).solve(domain, cumulative, eta, tol, &start)
}

/// Learning rate, exploration vectors and solver tolerance.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LearnerSchedule {
    pub eta: f64,
    /// Exploration over `V ∪ E`.
    pub gamma: Vec<f64>,
    /// Exploration over live bits.
    pub gamma_hat: Vec<f64>,
    pub horizon: usize,
    pub delta: f64,
    pub tol: f64,
}

/// Default solver tolerance `min(1/T², 1e-7)`.
pub fn default_tol(horizon: usize) -> f64 {
    (1.0 / (horizon as f64).powi(2)).min(1e-7)
}

/// The default exploration level
/// `√(K·log₂(5(|V|+|E|+extra)/δ) / (|E|·T))`, where `extra` is `K` on the
/// augmented domain and 0 without bits.
pub fn default_gamma(
    k: usize,
    n_vertices: usize,
    n_edges: usize,
    extra: usize,
    horizon: usize,
    delta: f64,
) -> f64 {
    let arg = 5.0 * (n_vertices + n_edges + extra) as f64 / delta;
    (k as f64 * arg.log2() / (n_edges as f64 * horizon as f64)).sqrt()
}

pub(crate) fn check_horizon_delta(horizon: usize, delta: f64) -> Result<()> {
    if horizon < 1 {
        return Err(Error::param("horizon", "T must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Default schedule: `η = 1/√T` and every exploration entry equal to
/// [`default_gamma`]. Without bits, `K` is the common path length.
pub fn default_schedule(domain: &FtrlDomain, horizon: usize, delta: f64) -> Result<LearnerSchedule> {
    check_horizon_delta(horizon, delta)?;
    let dag = domain.dag();
    let (k, extra) = match domain.bits() {
        Some(map) => (map.k(), map.k()),
        None => (dag.path_length_range()?.1, 0),
    };
    let g = default_gamma(k, dag.num_vertices(), dag.num_edges(), extra, horizon, delta);
    Ok(LearnerSchedule {
        eta: 1.0 / (horizon as f64).sqrt(),
        gamma: vec![g; dag.dim()],
        gamma_hat: vec![g; domain.bits().map_or(0, BitIndexMap::num_bits)],
        horizon,
        delta,
        tol: default_tol(horizon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::interval_set;
    use crate::generators::{example_dag, parallel_routes};

    #[test]
    fn regularizer_examples() {
        let (v, g, h) = regularizer_value_grad_hess(&[1.0; 4]).unwrap();
        assert_eq!(v, -4.0);
        assert!(g.iter().all(|&x| x == -0.5));
        assert!(h.iter().all(|&x| x == 0.25));
        let (v, g, _) = regularizer_value_grad_hess(&[0.25, 0.25]).unwrap();
        assert_eq!(v, -1.0);
        assert_eq!(g, vec![-1.0, -1.0]);
        assert!(matches!(
            regularizer_value_grad_hess(&[1.0, 0.0]),
            Err(Error::NonPositiveCoordinate { index: 1, .. })
        ));
    }

    #[test]
    fn symmetric_routes_split_evenly() {
        for k in 2..6 {
            let d = parallel_routes(k);
            let dom = FtrlDomain::new(d.clone(), None).unwrap();
            let out = solve(&dom, &vec![0.0; dom.dim()], 1.0, 1e-10).unwrap();
            for e in 0..d.num_edges() {
                assert!((out.x[d.edge_coord(e)] - 1.0 / k as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interior_point_is_feasible() {
        let d = example_dag();
        let dom = FtrlDomain::new(d.clone(), Some(interval_set(&d))).unwrap();
        let x = dom.interior_point();
        assert!(dom.residual(&x) < 1e-14);
        assert!(x.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn schedule_defaults() {
        let d = Dag::new(2, vec![(0, 1)], 0, 1).unwrap();
        let dom = FtrlDomain::new(d, None).unwrap();
        let s = default_schedule(&dom, 1, 0.5).unwrap();
        assert_eq!(s.eta, 1.0);
        assert!(default_schedule(&dom, 10, 1.5).is_err());
        assert!(default_schedule(&dom, 0, 0.5).is_err());
    }
}
