//! The FTRL bandit learner in its three modes, the choose/feed protocol
//! shared with baselines, and single-episode regret accounting.

use std::time::Instant;

use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::augment::{interval_set, BitIndexMap};
use crate::compress::{compress, CompressedDag};
use crate::error::{Error, Result};
use crate::estimators::{estimate_entries, RoundObservation};
use crate::ftrl::{check_horizon_delta, default_schedule, FtrlDomain, LearnerSchedule, Solver};
use crate::graph::{Dag, PathIncidence, PruneMap};
use crate::sampler::{replica_rng, sample_path};

/// Which domain the learner optimizes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// All paths have the same length; no bit coordinates.
    EqualLength,
    /// Bits equalize path lengths on the input graph.
    Augmented,
    /// Augmented learner on the compressed graph.
    Compressed,
}

/// Exploration override.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaOverride {
    /// Same value on every coordinate, bits included.
    Uniform(f64),
    /// One value per `V ∪ E` coordinate of the input graph; bits keep the
    /// default. Not available in compressed mode.
    PerCoordinate(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnerConfig {
    pub mode: Mode,
    pub horizon: usize,
    pub delta: f64,
    pub eta: Option<f64>,
    pub gamma: Option<GammaOverride>,
    pub tol: Option<f64>,
    pub seed: u64,
    /// RNG stream, so replicas sharing a seed stay independent.
    pub stream: u64,
    pub warm_start: bool,
}

impl LearnerConfig {
    pub fn new(mode: Mode, horizon: usize, delta: f64, seed: u64) -> Self {
        LearnerConfig {
            mode,
            horizon,
            delta,
            eta: None,
            gamma: None,
            tol: None,
            seed,
            stream: 0,
            warm_start: true,
        }
    }
}

/// One round of play.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub path: PathIncidence,
    pub loss: f64,
    pub solver_iterations: usize,
    /// Smallest marginal among the coordinates of the played path.
    pub rarest_marginal: f64,
}

/// The choose/feed protocol shared by all learners.
pub trait Policy {
    /// Commits to a path of the original graph for the current round.
    fn choose(&mut self) -> Result<PathIncidence>;
    /// Reveals the scalar loss of the committed path.
    fn feed(&mut self, loss: f64) -> Result<()>;
}

struct Pending {
    path: PathIncidence,
    work_path: PathIncidence,
    marginals: Vec<f64>,
    iterations: usize,
}

struct Compression {
    cdag: CompressedDag,
    map: PruneMap,
}

/// FTRL learner with the square-root regularizer and implicit exploration.
pub struct Learner {
    config: LearnerConfig,
    original: Dag,
    prune: PruneMap,
    compression: Option<Compression>,
    domain: FtrlDomain,
    schedule: LearnerSchedule,
    solver: Solver,
    cumulative: Vec<f64>,
    last_solution: Vec<f64>,
    round: usize,
    rng: ChaCha20Rng,
    pending: Option<Pending>,
    last_log: Option<RoundLog>,
}

impl Learner {
    pub fn new(dag: &Dag, config: LearnerConfig) -> Result<Self> {
        check_horizon_delta(config.horizon, config.delta)?;
        let (pruned, prune) = dag.prune_with_map()?;
        let (work, bits, compression) = match config.mode {
            Mode::EqualLength => {
                let (lo, hi) = pruned.path_length_range()?;
                if lo != hi {
                    return Err(Error::UnequalLengths { min: lo, max: hi });
                }
                (pruned, None, None)
            }
            Mode::Augmented => {
                let bits = interval_set(&pruned);
                (pruned, Some(bits), None)
            }
            Mode::Compressed => {
                let cdag = compress(&pruned)?;
                let (g, map) = cdag.gdag.prune_with_map()?;
                let bits = interval_set(&g);
                (g, Some(bits), Some(Compression { cdag, map }))
            }
        };
        let domain = FtrlDomain::new(work, bits)?;
        let mut schedule = default_schedule(&domain, config.horizon, config.delta)?;
        if let Some(eta) = config.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::param("eta", format!("must be positive, got {eta}")));
            }
            schedule.eta = eta;
        }
        if let Some(tol) = config.tol {
            if !(tol > 0.0) {
                return Err(Error::param("tol", format!("must be positive, got {tol}")));
            }
            schedule.tol = tol;
        }
        match &config.gamma {
            None => {}
            Some(GammaOverride::Uniform(g)) => {
                if !(*g > 0.0) {
                    return Err(Error::param("gamma", format!("must be positive, got {g}")));
                }
                schedule.gamma.iter_mut().for_each(|x| *x = *g);
                schedule.gamma_hat.iter_mut().for_each(|x| *x = *g);
            }
            Some(GammaOverride::PerCoordinate(v)) => {
                if compression.is_some() {
                    return Err(Error::param(
                        "gamma",
                        "per-coordinate exploration is not available in compressed mode",
                    ));
                }
                if v.len() != dag.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: dag.dim(),
                        got: v.len(),
                    });
                }
                if v.iter().any(|g| !(*g > 0.0)) {
                    return Err(Error::param("gamma", "entries must be positive"));
                }
                schedule.gamma = prune.coord_vector(v);
            }
        }
        let solver = Solver::new(&domain);
        let last_solution = domain.interior_point();
        let rng = replica_rng(config.seed, config.stream);
        Ok(Learner {
            cumulative: vec![0.0; domain.dim()],
            config,
            original: dag.clone(),
            prune,
            compression,
            domain,
            schedule,
            solver,
            last_solution,
            round: 0,
            rng,
            pending: None,
            last_log: None,
        })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn schedule(&self) -> &LearnerSchedule {
        &self.schedule
    }

    /// The graph paths are reported on.
    pub fn original_dag(&self) -> &Dag {
        &self.original
    }

    /// The graph the optimization runs on (pruned input or pruned `G†`).
    pub fn working_dag(&self) -> &Dag {
        self.domain.dag()
    }

    pub fn domain(&self) -> &FtrlDomain {
        &self.domain
    }

    pub fn bits(&self) -> Option<&BitIndexMap> {
        self.domain.bits()
    }

    pub fn compressed(&self) -> Option<&CompressedDag> {
        self.compression.as_ref().map(|c| &c.cdag)
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Sum of the biased estimates fed so far.
    pub fn cumulative_estimates(&self) -> &[f64] {
        &self.cumulative
    }

    /// The most recent FTRL solution.
    pub fn last_solution(&self) -> &[f64] {
        &self.last_solution
    }

    pub fn last_log(&self) -> Option<&RoundLog> {
        self.last_log.as_ref()
    }

    /// Solves the current program without sampling.
    pub fn current_distribution(&mut self) -> Result<Vec<f64>> {
        let start = self.start_point();
        let out = self.solver.solve(
            &self.domain,
            &self.cumulative,
            self.schedule.eta,
            self.schedule.tol,
            &start,
        )?;
        Ok(out.x)
    }

    fn start_point(&self) -> Vec<f64> {
        if self.config.warm_start {
            self.last_solution.clone()
        } else {
            self.domain.interior_point()
        }
    }

    fn to_original(&self, work_path: &PathIncidence) -> Result<PathIncidence> {
        let in_pruned = match &self.compression {
            Some(c) => c.cdag.project_path(&c.map.path_back(work_path))?,
            None => work_path.clone(),
        };
        Ok(self.prune.path_back(&in_pruned))
    }
}

impl Policy for Learner {
    fn choose(&mut self) -> Result<PathIncidence> {
        if self.pending.is_some() {
            return Err(Error::ProtocolViolation("choose called twice without feed"));
        }
        if self.round >= self.config.horizon {
            return Err(Error::ProtocolViolation("horizon exhausted"));
        }
        let start = self.start_point();
        let out = self.solver.solve(
            &self.domain,
            &self.cumulative,
            self.schedule.eta,
            self.schedule.tol,
            &start,
        )?;
        let work_path = sample_path(self.domain.dag(), &out.x, &mut self.rng)?;
        let path = self.to_original(&work_path)?;
        self.last_solution = out.x.clone();
        self.pending = Some(Pending {
            path: path.clone(),
            work_path,
            marginals: out.x,
            iterations: out.iterations,
        });
        Ok(path)
    }

    fn feed(&mut self, loss: f64) -> Result<()> {
        if !(loss.abs() <= 1.0) {
            return Err(Error::OutOfRangeLoss(loss));
        }
        let pending = self
            .pending
            .take()
            .ok_or(Error::ProtocolViolation("feed called without choose"))?;
        let dag = self.domain.dag();
        let obs = RoundObservation::new(
            dag,
            self.domain.bits(),
            &pending.work_path,
            loss,
            pending.marginals,
        );
        let nve = dag.dim();
        let s = &self.schedule;
        let est = estimate_entries(dag, &obs, |i| {
            if i < nve {
                s.gamma[i]
            } else {
                s.gamma_hat[i - nve]
            }
        })?;
        for (i, v) in est {
            self.cumulative[i] += v;
        }
        let rarest = obs
            .chosen
            .iter()
            .map(|&i| obs.marginals[i])
            .fold(f64::INFINITY, f64::min);
        self.last_log = Some(RoundLog {
            round: self.round,
            path: pending.path,
            loss,
            solver_iterations: pending.iterations,
            rarest_marginal: rarest,
        });
        self.round += 1;
        Ok(())
    }
}

/// Source of per-round edge losses over the original graph.
pub trait Adversary {
    /// Edge losses for round `round`, fixed before the learner's draw.
    fn losses(&mut self, round: usize) -> Vec<f64>;
    /// Called with the learner's committed path after the round.
    fn observe(&mut self, _chosen: &PathIncidence) {}
}

/// Outcome of one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub losses: Vec<f64>,
    #[serde(skip)]
    pub paths: Vec<PathIncidence>,
    pub cum_regret: Vec<f64>,
    pub realized: f64,
    pub hindsight: f64,
    pub best_path: Vec<usize>,
    pub regret: f64,
    pub wall_clock_secs: f64,
}

/// Plays `horizon` rounds of `policy` against `adversary` on `dag`.
/// Loss vectors are checked against the `[-1, 1]` path-weight range every
/// round in debug builds and every 64th round otherwise.
pub fn run_episode(
    dag: &Dag,
    policy: &mut dyn Policy,
    adversary: &mut dyn Adversary,
    horizon: usize,
) -> Result<RegretReport> {
    let start = Instant::now();
    let mut losses = Vec::with_capacity(horizon);
    let mut paths = Vec::with_capacity(horizon);
    let mut cum_regret = Vec::with_capacity(horizon);
    let mut cum_y = vec![0.0; dag.num_edges()];
    let mut realized = 0.0;
    for t in 0..horizon {
        let y = adversary.losses(t);
        if y.len() != dag.num_edges() {
            return Err(Error::DimensionMismatch {
                expected: dag.num_edges(),
                got: y.len(),
            });
        }
        if cfg!(debug_assertions) || t % 64 == 0 {
            dag.check_loss_range(&y)?;
        }
        let p = policy.choose()?;
        let loss = p.weight(&y);
        policy.feed(loss)?;
        adversary.observe(&p);
        realized += loss;
        for (c, v) in cum_y.iter_mut().zip(&y) {
            *c += v;
        }
        let (_, best) = dag.best_path_in_hindsight(&cum_y)?;
        cum_regret.push(realized - best);
        losses.push(loss);
        paths.push(p);
    }
    let (best_path, hindsight) = dag.best_path_in_hindsight(&cum_y)?;
    Ok(RegretReport {
        losses,
        paths,
        cum_regret,
        realized,
        hindsight,
        best_path: best_path.edges,
        regret: realized - hindsight,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{example_dag, parallel_routes};

    struct Fixed(Vec<f64>);
    impl Adversary for Fixed {
        fn losses(&mut self, _: usize) -> Vec<f64> {
            self.0.clone()
        }
    }

    #[test]
    fn hypercube_like_graph_rejects_equal_length() {
        let d = Dag::new(3, vec![(0, 1), (1, 2), (0, 2)], 0, 2).unwrap();
        let cfg = LearnerConfig::new(Mode::EqualLength, 10, 0.1, 0);
        assert!(matches!(
            Learner::new(&d, cfg),
            Err(Error::UnequalLengths { min: 1, max: 2 })
        ));
    }

    #[test]
    fn protocol_is_enforced() {
        let d = parallel_routes(2);
        let mut l = Learner::new(&d, LearnerConfig::new(Mode::EqualLength, 5, 0.1, 1)).unwrap();
        assert!(matches!(l.feed(0.0), Err(Error::ProtocolViolation(_))));
        l.choose().unwrap();
        assert!(matches!(l.choose(), Err(Error::ProtocolViolation(_))));
        assert_eq!(l.feed(1.5), Err(Error::OutOfRangeLoss(1.5)));
        l.feed(0.0).unwrap();
        assert!(matches!(l.feed(0.0), Err(Error::ProtocolViolation(_))));
    }

    #[test]
    fn first_round_is_uniform_on_symmetric_routes() {
        let d = parallel_routes(2);
        let mut l = Learner::new(&d, LearnerConfig::new(Mode::EqualLength, 5, 0.1, 1)).unwrap();
        let x = l.current_distribution().unwrap();
        for e in 0..4 {
            assert!((x[d.edge_coord(e)] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_loss_updates_only_chosen_coordinates() {
        let d = parallel_routes(3);
        let mut l = Learner::new(&d, LearnerConfig::new(Mode::EqualLength, 5, 0.1, 1)).unwrap();
        let p = l.choose().unwrap();
        l.feed(0.0).unwrap();
        let dense = p.to_dense(&d);
        for (i, &c) in l.cumulative_estimates().iter().enumerate() {
            let interior = dense[i] == 1.0 && i != d.source() && i != d.sink();
            assert_eq!(c > 0.0, interior, "coordinate {i}");
        }
    }

    #[test]
    fn zero_adversary_has_zero_regret() {
        let d = example_dag();
        let mut l = Learner::new(&d, LearnerConfig::new(Mode::Compressed, 20, 0.1, 3)).unwrap();
        let mut adv = Fixed(vec![0.0; d.num_edges()]);
        let r = run_episode(&d, &mut l, &mut adv, 20).unwrap();
        assert_eq!(r.regret, 0.0);
        for p in &r.paths {
            PathIncidence::from_edges(&d, p.edges.clone()).unwrap();
        }
    }

    #[test]
    fn single_round_regret_is_bounded() {
        let d = example_dag();
        let mut l = Learner::new(&d, LearnerConfig::new(Mode::Augmented, 1, 0.1, 3)).unwrap();
        let mut w = vec![0.0; d.num_edges()];
        w[0] = 0.5;
        w[2] = -0.5;
        let r = run_episode(&d, &mut l, &mut Fixed(w), 1).unwrap();
        assert!(r.regret.abs() <= 2.0);
    }

    #[test]
    fn preference_moves_towards_better_route() {
        let d = parallel_routes(2);
        let mut l = Learner::new(&d, LearnerConfig::new(Mode::EqualLength, 400, 0.1, 9)).unwrap();
        for _ in 0..400 {
            let p = l.choose().unwrap();
            let loss = if p.edges[0] == 0 { 1.0 } else { -1.0 };
            l.feed(loss).unwrap();
        }
        let x = l.current_distribution().unwrap();
        assert!(x[d.edge_coord(2)] > x[d.edge_coord(0)]);
    }
}
