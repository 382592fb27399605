//! Loss generators for experiments.

use std::collections::HashMap;

use dagbandit::reductions::{Multitask, Reduction};
use dagbandit::sampler::replica_rng;
use dagbandit::{Adversary, Dag, Error, PathIncidence, Result};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

/// Oblivious losses: fixed edge means plus uniform noise. The noise on each
/// edge is drawn from `U(−noise/L, noise/L)` with `L` the longest path
/// length, so no path's noise exceeds `noise`.
#[derive(Debug, Clone)]
pub struct StochasticIid {
    means: Vec<f64>,
    edge_noise: f64,
    rng: ChaCha20Rng,
}

impl StochasticIid {
    pub fn new(dag: &Dag, means: Vec<f64>, noise: f64, seed: u64) -> Result<Self> {
        if means.len() != dag.num_edges() {
            return Err(Error::DimensionMismatch {
                expected: dag.num_edges(),
                got: means.len(),
            });
        }
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "noise",
                reason: format!("must be non-negative, got {noise}"),
            });
        }
        let (lo, hi) = dag.path_weight_range(&means)?;
        if lo - noise < -1.0 || hi + noise > 1.0 {
            return Err(Error::RangeViolation {
                min: lo - noise,
                max: hi + noise,
            });
        }
        let longest = dag.path_length_range()?.1.max(1);
        Ok(StochasticIid {
            means,
            edge_noise: noise / longest as f64,
            rng: replica_rng(seed, 1),
        })
    }

    /// Means that are 0 on the edges of `best` and `gap` elsewhere, so every
    /// other path's mean exceeds the best one's by at least `gap`.
    pub fn gap_means(dag: &Dag, best: &PathIncidence, gap: f64) -> Result<Vec<f64>> {
        let best = PathIncidence::from_edges(dag, best.edges.clone())?;
        let mut means = vec![gap; dag.num_edges()];
        for &e in &best.edges {
            means[e] = 0.0;
        }
        Ok(means)
    }

    pub fn with_gap(dag: &Dag, best: &PathIncidence, gap: f64, noise: f64, seed: u64) -> Result<Self> {
        Self::new(dag, Self::gap_means(dag, best, gap)?, noise, seed)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }
}

impl Adversary for StochasticIid {
    fn losses(&mut self, _round: usize) -> Vec<f64> {
        let a = self.edge_noise;
        self.means
            .iter()
            .map(|m| {
                if a > 0.0 {
                    m + self.rng.random_range(-a..=a)
                } else {
                    *m
                }
            })
            .collect()
    }
}

/// Puts total loss `magnitude` on the path the learner has played most
/// often so far, spread evenly over its edges. Ties go to the
/// lexicographically smallest edge list; round 1 has no history and gets
/// zero loss.
#[derive(Debug, Clone)]
pub struct AdaptiveTargeting {
    num_edges: usize,
    magnitude: f64,
    counts: HashMap<Vec<usize>, usize>,
    leader: Option<(Vec<usize>, usize)>,
}

impl AdaptiveTargeting {
    pub fn new(dag: &Dag, magnitude: f64) -> Result<Self> {
        if !(magnitude.abs() <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "magnitude",
                reason: format!("must lie in [-1, 1], got {magnitude}"),
            });
        }
        Ok(AdaptiveTargeting {
            num_edges: dag.num_edges(),
            magnitude,
            counts: HashMap::new(),
            leader: None,
        })
    }
}

impl Adversary for AdaptiveTargeting {
    fn losses(&mut self, _round: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.num_edges];
        if let Some((edges, _)) = &self.leader {
            let share = self.magnitude / edges.len() as f64;
            for &e in edges {
                w[e] = share;
            }
        }
        w
    }

    fn observe(&mut self, chosen: &PathIncidence) {
        let c = self.counts.entry(chosen.edges.clone()).or_insert(0);
        *c += 1;
        let c = *c;
        let better = match &self.leader {
            None => true,
            Some((edges, n)) => c > *n || (c == *n && chosen.edges < *edges),
        };
        if better {
            self.leader = Some((chosen.edges.clone(), c));
        }
    }
}

/// Multi-task instance with a hidden best arm per task. Each round one task
/// `j` is drawn uniformly; its arms get Bernoulli losses with mean
/// `1/2 − ε_j` for the hidden arm and `1/2` otherwise, and all other tasks
/// get 0. `ε_j = m·√d_j / (10·√T)`.
#[derive(Debug, Clone)]
pub struct MultitaskLowerBound {
    mt: Multitask,
    hidden: Vec<usize>,
    eps: Vec<f64>,
    rng: ChaCha20Rng,
}

impl MultitaskLowerBound {
    pub fn new(dims: &[usize], horizon: usize, seed: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "must be positive".into(),
            });
        }
        let mt = Multitask::new(dims)?;
        let mut rng = replica_rng(seed, 2);
        let hidden = dims.iter().map(|&d| rng.random_range(0..d)).collect();
        let eps = Self::epsilons(dims, horizon);
        if let Some(e) = eps.iter().find(|&&e| e > 0.5) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: format!("too short: epsilon {e} exceeds 1/2"),
            });
        }
        Ok(MultitaskLowerBound { mt, hidden, eps, rng })
    }

    pub fn epsilons(dims: &[usize], horizon: usize) -> Vec<f64> {
        let m = dims.len() as f64;
        let t = horizon as f64;
        dims.iter()
            .map(|&d| m * (d as f64).sqrt() / (10.0 * t.sqrt()))
            .collect()
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn reduction(&self) -> &Multitask {
        &self.mt
    }

    /// Mean per-arm losses of round draws, averaged over the task draw.
    pub fn expected_arm_losses(&self) -> Vec<f64> {
        let m = self.mt.dims().len() as f64;
        let mut y = vec![0.0; self.mt.total_arms()];
        for (j, &d) in self.mt.dims().iter().enumerate() {
            for a in 0..d {
                let p = if a == self.hidden[j] { 0.5 - self.eps[j] } else { 0.5 };
                y[self.mt.arm_index(j, a)] = p / m;
            }
        }
        y
    }
}

impl Adversary for MultitaskLowerBound {
    fn losses(&mut self, _round: usize) -> Vec<f64> {
        let dims = self.mt.dims().to_vec();
        let j = self.rng.random_range(0..dims.len());
        let mut y = vec![0.0; self.mt.total_arms()];
        for a in 0..dims[j] {
            let p = if a == self.hidden[j] { 0.5 - self.eps[j] } else { 0.5 };
            if self.rng.random_bool(p) {
                y[self.mt.arm_index(j, a)] = 1.0;
            }
        }
        self.mt.lift_loss(&y)
    }
}

/// Same loss vector every round.
#[derive(Debug, Clone)]
pub struct FixedLosses(pub Vec<f64>);

impl Adversary for FixedLosses {
    fn losses(&mut self, _round: usize) -> Vec<f64> {
        self.0.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dagbandit::generators::parallel_routes;

    #[test]
    fn zero_means_stay_within_noise() {
        let g = parallel_routes(3);
        let mut adv = StochasticIid::new(&g, vec![0.0; 6], 0.3, 1).unwrap();
        for t in 0..200 {
            let (lo, hi) = g.path_weight_range(&adv.losses(t)).unwrap();
            assert!(lo >= -0.3 && hi <= 0.3);
        }
    }

    #[test]
    fn range_checked_at_construction() {
        let g = parallel_routes(2);
        // Routes are edges (0,1),(1,3) and (0,2),(2,3).
        assert!(StochasticIid::new(&g, vec![0.05, 0.05, -0.05, -0.05], 0.05, 0).is_ok());
        let err = StochasticIid::new(&g, vec![0.6, 0.6, 0.0, 0.0], 0.0, 0).unwrap_err();
        assert!(matches!(err, Error::RangeViolation { .. }));
    }

    #[test]
    fn targeting_follows_history() {
        let g = parallel_routes(2);
        let mut adv = AdaptiveTargeting::new(&g, 0.8).unwrap();
        assert_eq!(adv.losses(0), vec![0.0; 4]);
        let p = PathIncidence::from_vertices(&g, &[0, 2, 3]).unwrap();
        adv.observe(&p);
        let w = adv.losses(1);
        assert_eq!(p.weight(&w), 0.8);
        assert_eq!(w.iter().sum::<f64>(), 0.8);
    }

    #[test]
    fn targeting_ties_are_lexicographic() {
        let g = parallel_routes(2);
        let mut adv = AdaptiveTargeting::new(&g, 1.0).unwrap();
        let p = PathIncidence::from_vertices(&g, &[0, 2, 3]).unwrap();
        let q = PathIncidence::from_vertices(&g, &[0, 1, 3]).unwrap();
        adv.observe(&p);
        adv.observe(&q);
        let w = adv.losses(2);
        assert_eq!(q.weight(&w), 1.0);
    }

    #[test]
    fn epsilon_formula() {
        let eps = MultitaskLowerBound::epsilons(&[8, 8], 10_000);
        assert_eq!(eps[0], 2.0 * 8f64.sqrt() / (10.0 * 100.0));
    }

    mod props {
        use super::*;
        use dagbandit::generators::random_dag;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};

        fn in_range(g: &Dag, y: &[f64]) -> bool {
            let (lo, hi) = g.path_weight_range(y).unwrap();
            lo >= -1.0 - 1e-12 && hi <= 1.0 + 1e-12
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn stochastic_losses_stay_in_range(
                graph_seed in 0u64..1000, n in 3usize..12, p in 0.2f64..0.9,
                gap in 0.0f64..0.4, noise in 0.0f64..0.3, seed in any::<u64>(),
            ) {
                let mut rng = ChaCha20Rng::seed_from_u64(graph_seed);
                let g = random_dag(&mut rng, n, p);
                let (best, _) = g.best_path_in_hindsight(&vec![0.0; g.num_edges()]).unwrap();
                let adv = StochasticIid::with_gap(&g, &best, gap, noise, seed);
                prop_assume!(adv.is_ok());
                let mut adv = adv.unwrap();
                for t in 0..50 {
                    let y = adv.losses(t);
                    prop_assert!(in_range(&g, &y));
                }
            }

            #[test]
            fn adaptive_losses_stay_in_range(
                graph_seed in 0u64..1000, n in 3usize..12, magnitude in 0.0f64..=1.0, picks in any::<u64>(),
            ) {
                let mut rng = ChaCha20Rng::seed_from_u64(graph_seed);
                let g = random_dag(&mut rng, n, 0.5);
                let paths = g.enumerate_paths(1000).unwrap();
                let mut adv = AdaptiveTargeting::new(&g, magnitude).unwrap();
                let mut pick = ChaCha20Rng::seed_from_u64(picks);
                for t in 0..40 {
                    let y = adv.losses(t);
                    prop_assert!(in_range(&g, &y));
                    adv.observe(&paths[pick.random_range(0..paths.len())]);
                }
            }

            #[test]
            fn lower_bound_losses_stay_in_range(
                dims in proptest::collection::vec(2usize..6, 1..4), horizon in 100usize..5000, seed in any::<u64>(),
            ) {
                let mut adv = MultitaskLowerBound::new(&dims, horizon, seed).unwrap();
                let g = adv.reduction().dag().clone();
                for t in 0..30 {
                    let y = adv.losses(t);
                    prop_assert!(in_range(&g, &y));
                }
            }
        }
    }
}

