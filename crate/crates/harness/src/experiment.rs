//! Experiment grids: configuration, execution and on-disk artifacts.
//!
//! A config names one graph, a horizon, a confidence level, a list of seeds,
//! and lists of algorithms and adversaries. Every (algorithm, adversary,
//! seed) triple is one run. With an `output_dir`, each run gets a directory
//! holding `config.json`, `trajectory.csv` and `summary.json`, and the grid
//! gets `summary.json` plus `curves.csv` with median and quartile regret
//! curves.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use dagbandit::format::parse_dag;
use dagbandit::generators::{example_dag, parallel_routes, random_dag};
use dagbandit::reductions::{Hypercube, MSets, Multitask, Reduction};
use dagbandit::sampler::replica_rng;
use dagbandit::{
    run_episode, Adversary, Dag, GammaOverride, Learner, LearnerConfig, Mode, PathIncidence,
    Policy, RegretReport,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversaries::{AdaptiveTargeting, FixedLosses, MultitaskLowerBound, StochasticIid};
use crate::baselines::{Exp3IxMultitask, Exp3Paths, UniformPaths};
use crate::error::{HarnessError, HarnessResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "DAGBANDIT_THREADS";

const DEFAULT_PATH_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    Example,
    ParallelRoutes { routes: usize },
    File { path: PathBuf },
    Random { vertices: usize, edge_prob: f64, seed: u64 },
    Multitask { dims: Vec<usize> },
    Hypercube { d: usize },
    Mset { d: usize, m: usize },
}

impl GraphSpec {
    pub fn build(&self) -> HarnessResult<Dag> {
        Ok(match self {
            GraphSpec::Example => example_dag(),
            GraphSpec::ParallelRoutes { routes } => {
                if *routes == 0 {
                    return Err(HarnessError::config("graph.routes", "must be positive"));
                }
                parallel_routes(*routes)
            }
            GraphSpec::File { path } => {
                let text = fs::read_to_string(path)
                    .map_err(|e| HarnessError::config("graph.path", format!("{}: {e}", path.display())))?;
                parse_dag(&text)?
            }
            GraphSpec::Random { vertices, edge_prob, seed } => {
                if *vertices < 2 || !(0.0..=1.0).contains(edge_prob) {
                    return Err(HarnessError::config(
                        "graph",
                        "random graphs need vertices >= 2 and edge_prob in [0, 1]",
                    ));
                }
                random_dag(&mut replica_rng(*seed, 7), *vertices, *edge_prob)
            }
            GraphSpec::Multitask { dims } => Multitask::new(dims)?.dag().clone(),
            GraphSpec::Hypercube { d } => Hypercube::new(*d)?.dag().clone(),
            GraphSpec::Mset { d, m } => MSets::new(*d, *m)?.dag().clone(),
        })
    }

    fn dims(&self) -> Option<&[usize]> {
        match self {
            GraphSpec::Multitask { dims } => Some(dims),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Ftrl {
        mode: Mode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        /// Uniform exploration override.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        /// Per-task exploration on a multi-task graph.
        #[serde(default)]
        multitask_gamma: bool,
        /// Solver tolerance override.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Exp3Ix {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Exp3Paths {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Uniform {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl AlgorithmSpec {
    pub fn label(&self) -> String {
        match self {
            AlgorithmSpec::Ftrl { label: Some(l), .. }
            | AlgorithmSpec::Exp3Ix { label: Some(l) }
            | AlgorithmSpec::Exp3Paths { label: Some(l), .. }
            | AlgorithmSpec::Uniform { label: Some(l), .. } => l.clone(),
            AlgorithmSpec::Ftrl { mode, multitask_gamma, gamma, .. } => {
                let mode = match mode {
                    Mode::EqualLength => "equal-length",
                    Mode::Augmented => "augmented",
                    Mode::Compressed => "compressed",
                };
                let suffix = if *multitask_gamma {
                    "-taskgamma"
                } else if gamma.is_some() {
                    "-fixedgamma"
                } else {
                    ""
                };
                format!("ftrl-{mode}{suffix}")
            }
            AlgorithmSpec::Exp3Ix { .. } => "exp3-ix".into(),
            AlgorithmSpec::Exp3Paths { .. } => "exp3-paths".into(),
            AlgorithmSpec::Uniform { .. } => "uniform".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// Either explicit `means`, or `gap` around `best_path` (edge list;
    /// defaults to a fixed shortest path).
    Stochastic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        means: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        best_path: Option<Vec<usize>>,
        #[serde(default)]
        noise: f64,
    },
    Adaptive { magnitude: f64 },
    MultitaskLowerBound,
    Fixed { losses: Vec<f64> },
}

impl AdversarySpec {
    pub fn label(&self) -> String {
        match self {
            AdversarySpec::Stochastic { gap: Some(g), .. } => format!("stochastic-gap{g}"),
            AdversarySpec::Stochastic { .. } => "stochastic".into(),
            AdversarySpec::Adaptive { magnitude } => format!("adaptive{magnitude}"),
            AdversarySpec::MultitaskLowerBound => "multitask-lower-bound".into(),
            AdversarySpec::Fixed { .. } => "fixed".into(),
        }
    }
}

fn default_delta() -> f64 {
    0.05
}

fn default_checkpoints() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub horizon: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub adversaries: Vec<AdversarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Number of rounds sampled for the aggregate regret curves.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> HarnessResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            HarnessError::Config {
                field: path,
                msg: format!("{inner} (line {})", inner.line()),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if self.horizon == 0 {
            return Err(HarnessError::config("horizon", "must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::config(
                "delta",
                format!("must lie in (0, 1), got {}", self.delta),
            ));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::config("seeds", "need at least one seed"));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::config("algorithms", "need at least one algorithm"));
        }
        if self.adversaries.is_empty() {
            return Err(HarnessError::config("adversaries", "need at least one adversary"));
        }
        let multitask = self.graph.dims().is_some();
        for (i, a) in self.algorithms.iter().enumerate() {
            let needs_mt = matches!(
                a,
                AlgorithmSpec::Exp3Ix { .. } | AlgorithmSpec::Ftrl { multitask_gamma: true, .. }
            );
            if needs_mt && !multitask {
                return Err(HarnessError::config(
                    format!("algorithms[{i}]"),
                    "requires a multitask graph",
                ));
            }
        }
        for (i, a) in self.adversaries.iter().enumerate() {
            match a {
                AdversarySpec::MultitaskLowerBound if !multitask => {
                    return Err(HarnessError::config(
                        format!("adversaries[{i}]"),
                        "requires a multitask graph",
                    ));
                }
                AdversarySpec::Stochastic { means, gap, .. } if means.is_some() == gap.is_some() => {
                    return Err(HarnessError::config(
                        format!("adversaries[{i}]"),
                        "give exactly one of `means` and `gap`",
                    ));
                }
                _ => {}
            }
        }
        let mut labels = HashMap::new();
        for (i, a) in self.algorithms.iter().enumerate() {
            if let Some(j) = labels.insert(a.label(), i) {
                return Err(HarnessError::config(
                    format!("algorithms[{i}]"),
                    format!("label `{}` already used by algorithms[{j}]", a.label()),
                ));
            }
        }
        Ok(())
    }

    pub fn num_runs(&self) -> usize {
        self.algorithms.len() * self.adversaries.len() * self.seeds.len()
    }
}

/// One finished run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: String,
    pub adversary: String,
    pub seed: u64,
    pub report: RegretReport,
    /// Per-round index into `path_dict`.
    pub path_ids: Vec<usize>,
    /// Paths as edge lists, in order of first appearance.
    pub path_dict: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub adversary: String,
    pub seed: u64,
    pub horizon: usize,
    pub realized: f64,
    pub hindsight: f64,
    pub regret: f64,
    pub best_path: Vec<usize>,
    pub distinct_paths: usize,
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub algorithm: String,
    pub adversary: String,
    pub runs: usize,
    pub median_regret: f64,
    pub q25_regret: f64,
    pub q75_regret: f64,
    pub median_wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub groups: Vec<GroupSummary>,
    pub runs: Vec<RunSummary>,
}

impl RunResult {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            algorithm: self.algorithm.clone(),
            adversary: self.adversary.clone(),
            seed: self.seed,
            horizon: self.report.losses.len(),
            realized: self.report.realized,
            hindsight: self.report.hindsight,
            regret: self.report.regret,
            best_path: self.report.best_path.clone(),
            distinct_paths: self.path_dict.len(),
            wall_clock_secs: self.report.wall_clock_secs,
        }
    }

    /// `round,path_id,loss,cum_regret` rows, rounds starting at 1.
    pub fn trajectory_csv(&self) -> HarnessResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["round", "path_id", "loss", "cum_regret"])?;
        for (t, ((id, loss), cr)) in self
            .path_ids
            .iter()
            .zip(&self.report.losses)
            .zip(&self.report.cum_regret)
            .enumerate()
        {
            w.write_record([
                (t + 1).to_string(),
                id.to_string(),
                loss.to_string(),
                cr.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// `path_id,edges` rows with space-separated edge indices.
    pub fn paths_csv(&self) -> String {
        let mut out = String::from("path_id,edges\n");
        for (i, p) in self.path_dict.iter().enumerate() {
            let edges: Vec<String> = p.iter().map(|e| e.to_string()).collect();
            out.push_str(&format!("{i},{}\n", edges.join(" ")));
        }
        out
    }

    /// Writes the run directory.
    pub fn persist(&self, dir: &Path, config: &serde_json::Value) -> HarnessResult<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)? + "\n")?;
        fs::write(dir.join("trajectory.csv"), self.trajectory_csv()?)?;
        fs::write(dir.join("paths.csv"), self.paths_csv())?;
        fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&self.summary())? + "\n",
        )?;
        Ok(())
    }
}

/// Builds the policy for one run.
pub fn build_policy(
    spec: &AlgorithmSpec,
    graph: &GraphSpec,
    dag: &Dag,
    horizon: usize,
    delta: f64,
    seed: u64,
) -> HarnessResult<Box<dyn Policy + Send>> {
    Ok(match spec {
        AlgorithmSpec::Ftrl {
            mode,
            eta,
            gamma,
            multitask_gamma,
            tol,
            ..
        } => {
            let mut cfg = LearnerConfig::new(*mode, horizon, delta, seed);
            cfg.eta = *eta;
            cfg.tol = *tol;
            if let Some(g) = gamma {
                cfg.gamma = Some(GammaOverride::Uniform(*g));
            }
            if *multitask_gamma {
                let dims = graph
                    .dims()
                    .ok_or_else(|| HarnessError::config("algorithms", "multitask_gamma needs a multitask graph"))?;
                let g = Multitask::new(dims)?.gamma_override(horizon, delta)?;
                cfg.gamma = Some(GammaOverride::PerCoordinate(g));
            }
            Box::new(Learner::new(dag, cfg)?)
        }
        AlgorithmSpec::Exp3Ix { .. } => {
            let dims = graph
                .dims()
                .ok_or_else(|| HarnessError::config("algorithms", "exp3-ix needs a multitask graph"))?;
            Box::new(Exp3IxMultitask::new(dims, horizon, seed)?)
        }
        AlgorithmSpec::Exp3Paths { cap, .. } => Box::new(Exp3Paths::new(
            dag,
            horizon,
            cap.unwrap_or(DEFAULT_PATH_CAP),
            seed,
        )?),
        AlgorithmSpec::Uniform { cap, .. } => {
            Box::new(UniformPaths::new(dag, cap.unwrap_or(DEFAULT_PATH_CAP), seed)?)
        }
    })
}

/// Builds the adversary for one run.
pub fn build_adversary(
    spec: &AdversarySpec,
    graph: &GraphSpec,
    dag: &Dag,
    horizon: usize,
    seed: u64,
) -> HarnessResult<Box<dyn Adversary + Send>> {
    Ok(match spec {
        AdversarySpec::Stochastic {
            means,
            gap,
            best_path,
            noise,
        } => {
            let means = match (means, gap) {
                (Some(m), None) => m.clone(),
                (None, Some(g)) => {
                    let best = match best_path {
                        Some(edges) => PathIncidence::from_edges(dag, edges.clone())?,
                        None => default_best_path(dag)?,
                    };
                    StochasticIid::gap_means(dag, &best, *g)?
                }
                _ => {
                    return Err(HarnessError::config(
                        "adversaries",
                        "give exactly one of `means` and `gap`",
                    ))
                }
            };
            Box::new(StochasticIid::new(dag, means, *noise, seed)?)
        }
        AdversarySpec::Adaptive { magnitude } => Box::new(AdaptiveTargeting::new(dag, *magnitude)?),
        AdversarySpec::MultitaskLowerBound => {
            let dims = graph
                .dims()
                .ok_or_else(|| HarnessError::config("adversaries", "needs a multitask graph"))?;
            Box::new(MultitaskLowerBound::new(dims, horizon, seed)?)
        }
        AdversarySpec::Fixed { losses } => {
            dag.check_loss_range(losses)?;
            Box::new(FixedLosses(losses.clone()))
        }
    })
}

/// Path used as the planted best path when none is given: the minimizer of
/// all-zero weights picked by the hindsight DP.
pub fn default_best_path(dag: &Dag) -> HarnessResult<PathIncidence> {
    Ok(dag.best_path_in_hindsight(&vec![0.0; dag.num_edges()])?.0)
}

/// Runs one (algorithm, adversary, seed) triple.
pub fn run_single(
    config: &ExperimentConfig,
    dag: &Dag,
    algorithm: &AlgorithmSpec,
    adversary: &AdversarySpec,
    seed: u64,
) -> HarnessResult<RunResult> {
    let mut policy = build_policy(algorithm, &config.graph, dag, config.horizon, config.delta, seed)?;
    let mut adv = build_adversary(adversary, &config.graph, dag, config.horizon, seed)?;
    let report = run_episode(dag, policy.as_mut(), adv.as_mut(), config.horizon)?;
    Ok(index_paths(algorithm.label(), adversary.label(), seed, report))
}

/// Wraps a finished episode, numbering its distinct paths by first use.
pub fn index_paths(algorithm: String, adversary: String, seed: u64, report: RegretReport) -> RunResult {
    let mut index: HashMap<&[usize], usize> = HashMap::new();
    let mut path_dict: Vec<Vec<usize>> = Vec::new();
    let mut path_ids = Vec::with_capacity(report.paths.len());
    for p in &report.paths {
        let id = *index.entry(&p.edges).or_insert_with(|| {
            path_dict.push(p.edges.clone());
            path_dict.len() - 1
        });
        path_ids.push(id);
    }
    RunResult {
        algorithm,
        adversary,
        seed,
        report,
        path_ids,
        path_dict,
    }
}

/// Worker count: `DAGBANDIT_THREADS` if set to a positive integer, else the
/// number of available cores.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Median of a sample (mean of the two middle values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    quantile(&v, 0.5)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Directory name of a run inside the output directory.
pub fn run_dir_name(algorithm: &str, adversary: &str, seed: u64) -> String {
    format!("{}__{}__seed{seed}", sanitize(algorithm), sanitize(adversary))
}

/// Runs the full grid in parallel, persisting artifacts if the config has
/// an output directory. Runs are returned in grid order (algorithm, then
/// adversary, then seed).
pub fn run_experiment(config: &ExperimentConfig) -> HarnessResult<(ExperimentSummary, Vec<RunResult>)> {
    config.validate()?;
    let dag = config.graph.build()?;
    let mut jobs = Vec::with_capacity(config.num_runs());
    for alg in &config.algorithms {
        for adv in &config.adversaries {
            for &seed in &config.seeds {
                jobs.push((alg, adv, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| HarnessError::config("threads", e.to_string()))?;
    let results: Vec<RunResult> = pool.install(|| {
        jobs.par_iter()
            .map(|(alg, adv, seed)| run_single(config, &dag, alg, adv, *seed))
            .collect::<HarnessResult<Vec<_>>>()
    })?;

    let mut groups = Vec::new();
    for alg in &config.algorithms {
        for adv in &config.adversaries {
            let (a, b) = (alg.label(), adv.label());
            let runs: Vec<&RunResult> = results
                .iter()
                .filter(|r| r.algorithm == a && r.adversary == b)
                .collect();
            let mut regrets: Vec<f64> = runs.iter().map(|r| r.report.regret).collect();
            regrets.sort_by(|x, y| x.total_cmp(y));
            let clocks: Vec<f64> = runs.iter().map(|r| r.report.wall_clock_secs).collect();
            groups.push(GroupSummary {
                algorithm: a,
                adversary: b,
                runs: runs.len(),
                median_regret: quantile(&regrets, 0.5),
                q25_regret: quantile(&regrets, 0.25),
                q75_regret: quantile(&regrets, 0.75),
                median_wall_clock_secs: median(&clocks),
            });
        }
    }
    let summary = ExperimentSummary {
        config: config.clone(),
        groups,
        runs: results.iter().map(RunResult::summary).collect(),
    };

    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir)?;
        for r in &results {
            let alg = config.algorithms.iter().find(|a| a.label() == r.algorithm);
            let adv = config.adversaries.iter().find(|a| a.label() == r.adversary);
            let echo = serde_json::json!({
                "graph": config.graph,
                "horizon": config.horizon,
                "delta": config.delta,
                "seed": r.seed,
                "algorithm": alg,
                "adversary": adv,
            });
            r.persist(&dir.join(run_dir_name(&r.algorithm, &r.adversary, r.seed)), &echo)?;
        }
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
        fs::write(dir.join("curves.csv"), curves_csv(config, &results))?;
    }
    Ok((summary, results))
}

/// Median and quartile cumulative regret per group at evenly spaced rounds.
pub fn curves_csv(config: &ExperimentConfig, results: &[RunResult]) -> String {
    let t = config.horizon;
    let k = config.checkpoints.clamp(1, t);
    let rounds: Vec<usize> = (1..=k).map(|i| (i * t).div_ceil(k)).collect();
    let mut out = String::from("algorithm,adversary,round,median,q25,q75\n");
    for alg in &config.algorithms {
        for adv in &config.adversaries {
            let (a, b) = (alg.label(), adv.label());
            let runs: Vec<&RunResult> = results
                .iter()
                .filter(|r| r.algorithm == a && r.adversary == b)
                .collect();
            for &round in &rounds {
                let mut v: Vec<f64> = runs.iter().map(|r| r.report.cum_regret[round - 1]).collect();
                v.sort_by(|x, y| x.total_cmp(y));
                out.push_str(&format!(
                    "{a},{b},{round},{},{},{}\n",
                    quantile(&v, 0.5),
                    quantile(&v, 0.25),
                    quantile(&v, 0.75)
                ));
            }
        }
    }
    out
}
