//! Importance-weighted loss estimators.
//!
//! After playing a path with scalar loss `ℓ`, each chosen coordinate is
//! charged `numerator / (marginal + γ)`:
//! edges `1 + ℓ`, interior vertices `1 − ℓ`, bits `2`; source and sink get 0.
//! With `γ = 0` the estimate is relatively unbiased: its expectation against a
//! path differs from the true path loss by a path-independent offset when all
//! paths have the same length, and by `2K − 1` on the augmented space.
//!
//! Losses live in `[−1, 1]`, so the largest numerator is 2.

use crate::augment::{augment_point, augmented_incidence, BitIndexMap};
use crate::error::{Error, Result};
use crate::ftrl::LearnerSchedule;
use crate::graph::{Dag, PathIncidence};
use crate::sampler::sampler_law;

/// What the learner knows after a round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundObservation {
    /// Sorted augmented coordinates equal to 1 for the played path.
    pub chosen: Vec<usize>,
    pub loss: f64,
    /// The sampling point; its entries are the probabilities that each
    /// coordinate is 1.
    pub marginals: Vec<f64>,
}

impl RoundObservation {
    /// Observation for a path played from `marginals` on `dag` (plus bits).
    pub fn new(
        dag: &Dag,
        bits: Option<&BitIndexMap>,
        path: &PathIncidence,
        loss: f64,
        marginals: Vec<f64>,
    ) -> Self {
        let mut chosen: Vec<usize> = path
            .vertices
            .iter()
            .copied()
            .chain(path.edges.iter().map(|&e| dag.edge_coord(e)))
            .collect();
        if let Some(map) = bits {
            let mut slots: Vec<usize> = path.edges.iter().flat_map(|&e| map.edge_slots(e)).collect();
            slots.sort_unstable();
            slots.dedup();
            chosen.extend(slots.into_iter().map(|j| dag.dim() + j));
        }
        chosen.sort_unstable();
        RoundObservation {
            chosen,
            loss,
            marginals,
        }
    }
}

/// Sparse estimate `(coordinate, value)` over the chosen coordinates.
/// `gamma(i)` is the exploration added to coordinate `i`.
pub fn estimate_entries(
    dag: &Dag,
    obs: &RoundObservation,
    gamma: impl Fn(usize) -> f64,
) -> Result<Vec<(usize, f64)>> {
    if !(obs.loss.abs() <= 1.0) {
        return Err(Error::OutOfRangeLoss(obs.loss));
    }
    let n = dag.num_vertices();
    let nv_e = dag.dim();
    let mut out = Vec::with_capacity(obs.chosen.len());
    for &i in &obs.chosen {
        let num = if i < n {
            if i == dag.source() || i == dag.sink() {
                continue;
            }
            1.0 - obs.loss
        } else if i < nv_e {
            1.0 + obs.loss
        } else {
            2.0
        };
        let p = *obs
            .marginals
            .get(i)
            .ok_or(Error::DimensionMismatch {
                expected: i + 1,
                got: obs.marginals.len(),
            })?;
        let denom = p + gamma(i);
        if !(denom > 0.0) {
            return Err(Error::ZeroMarginal(i));
        }
        out.push((i, num / denom));
    }
    Ok(out)
}

fn densify(dim: usize, entries: Vec<(usize, f64)>) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for (i, x) in entries {
        v[i] = x;
    }
    v
}

/// Biased estimate `ŷ` with the schedule's exploration `γ` (and `γ̂` on bits).
pub fn biased_estimate(
    dag: &Dag,
    obs: &RoundObservation,
    schedule: &LearnerSchedule,
) -> Result<Vec<f64>> {
    let nv_e = dag.dim();
    let entries = estimate_entries(dag, obs, |i| {
        if i < nv_e {
            schedule.gamma[i]
        } else {
            schedule.gamma_hat[i - nv_e]
        }
    })?;
    Ok(densify(obs.marginals.len(), entries))
}

/// Unbiased estimate `ỹ` (no exploration).
pub fn unbiased_estimate(dag: &Dag, obs: &RoundObservation) -> Result<Vec<f64>> {
    let entries = estimate_entries(dag, obs, |_| 0.0)?;
    Ok(densify(obs.marginals.len(), entries))
}

/// Exact `E⟨x, ỹ⟩` when paths are drawn by the sampler from `xt` and the
/// played path's loss is `⟨path, y⟩`. With `bits` the expectation is taken on
/// the augmented space, `x` being lifted to `x ∘ b(x)`. Enumeration based.
pub fn exact_estimator_expectation(
    dag: &Dag,
    bits: Option<&BitIndexMap>,
    xt: &[f64],
    y: &[f64],
    x: &PathIncidence,
) -> Result<f64> {
    let marginals = match bits {
        Some(map) => augment_point(dag, map, &xt[..dag.dim()]),
        None => xt[..dag.dim()].to_vec(),
    };
    let x_dense = match bits {
        Some(map) => augmented_incidence(dag, map, x),
        None => x.to_dense(dag),
    };
    let mut total = 0.0;
    for (p, prob) in sampler_law(dag, xt)? {
        if prob == 0.0 {
            continue;
        }
        let obs = RoundObservation::new(dag, bits, &p, p.weight(y), marginals.clone());
        let est = estimate_entries(dag, &obs, |_| 0.0)?;
        let inner: f64 = est.iter().map(|&(i, v)| x_dense[i] * v).sum();
        total += prob * inner;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_routes() -> Dag {
        Dag::new(4, vec![(0, 1), (1, 3), (0, 2), (2, 3)], 0, 3).unwrap()
    }

    #[test]
    fn biased_formula() {
        let d = two_routes();
        let x = [1.0, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5];
        let p = PathIncidence::from_edges(&d, vec![0, 1]).unwrap();
        let obs = RoundObservation::new(&d, None, &p, 0.2, x.to_vec());
        let sched = LearnerSchedule {
            eta: 1.0,
            gamma: vec![0.1; d.dim()],
            gamma_hat: vec![],
            horizon: 1,
            delta: 0.1,
            tol: 1e-9,
        };
        let b = biased_estimate(&d, &obs, &sched).unwrap();
        assert!((b[d.edge_coord(0)] - 1.2 / 0.6).abs() < 1e-15);
        assert_eq!(b[d.edge_coord(2)], 0.0);
        assert_eq!(b[0], 0.0);
        assert_eq!(b[3], 0.0);
        let u = unbiased_estimate(&d, &obs).unwrap();
        assert!((u[d.edge_coord(0)] - 2.4).abs() < 1e-15);
        assert!(b.iter().zip(&u).all(|(a, b)| a <= b));
    }

    #[test]
    fn loss_minus_one_zeroes_edges() {
        let d = two_routes();
        let x = [1.0, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5];
        let p = PathIncidence::from_edges(&d, vec![2, 3]).unwrap();
        let obs = RoundObservation::new(&d, None, &p, -1.0, x.to_vec());
        let u = unbiased_estimate(&d, &obs).unwrap();
        assert_eq!(u[d.edge_coord(2)], 0.0);
        assert_eq!(u[d.edge_coord(3)], 0.0);
    }

    #[test]
    fn vertex_formula() {
        let d = two_routes();
        let x = [1.0, 0.4, 0.6, 1.0, 0.4, 0.4, 0.6, 0.6];
        let p = PathIncidence::from_edges(&d, vec![0, 1]).unwrap();
        let obs = RoundObservation::new(&d, None, &p, 0.2, x.to_vec());
        let u = unbiased_estimate(&d, &obs).unwrap();
        assert!((u[1] - 0.8 / 0.4).abs() < 1e-15);
    }

    #[test]
    fn bit_formula() {
        let d = Dag::new(3, vec![(0, 1), (1, 2), (0, 2)], 0, 2).unwrap();
        let map = crate::augment::interval_set(&d);
        let x = [1.0, 0.6, 1.0, 0.6, 0.6, 0.4, 0.4];
        let p = PathIncidence::from_edges(&d, vec![2]).unwrap();
        let obs = RoundObservation::new(&d, Some(&map), &p, 0.0, x.to_vec());
        let u = unbiased_estimate(&d, &obs).unwrap();
        assert!((u[d.dim()] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn zero_marginal_and_range() {
        let d = two_routes();
        let x = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        let p = PathIncidence::from_edges(&d, vec![0, 1]).unwrap();
        let obs = RoundObservation::new(&d, None, &p, 0.0, x.to_vec());
        assert_eq!(unbiased_estimate(&d, &obs).unwrap_err(), Error::ZeroMarginal(1));
        let obs = RoundObservation::new(&d, None, &p, 1.5, x.to_vec());
        assert_eq!(
            unbiased_estimate(&d, &obs).unwrap_err(),
            Error::OutOfRangeLoss(1.5)
        );
    }

    #[test]
    fn parallel_expectation() {
        // E⟨x_{route 1}, ỹ⟩ = y(route 1) + ‖x‖₁ − 2 with ‖x‖₁ = 5.
        let d = two_routes();
        let x = [1.0, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5];
        let y = [0.3, 0.1, -0.2, 0.4];
        let p = PathIncidence::from_edges(&d, vec![0, 1]).unwrap();
        let e = exact_estimator_expectation(&d, None, &x, &y, &p).unwrap();
        assert!((e - (0.4 + 3.0)).abs() < 1e-12);
    }
}
