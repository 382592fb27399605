//! `dagbandit` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure, 3 solver
//! failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dagbandit::compress::compress;
use dagbandit::format::{dag_to_json, dag_to_text, parse_dag, parse_loss_csv};
use dagbandit::reductions::{Blotto, Efg, EfgGame, Hypercube, MSets, Multitask, Reduction, ShortestWalk};
use dagbandit::{Dag, Learner, LearnerConfig, Mode};
use dagbandit_harness::experiment::{
    curves_csv, run_single, AlgorithmSpec, AdversarySpec, GraphSpec,
};
use dagbandit_harness::{run_experiment, ExperimentConfig, HarnessError};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "dagbandit", version, about = "Bandit online shortest paths on DAGs")]
struct Cli {
    /// Print progress and diagnostics to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Play one episode and print its trajectory or summary.
    Run(RunArgs),
    /// Run an experiment grid from a JSON config.
    Sweep(SweepArgs),
    /// Check a DAG file, a loss file against it, or an experiment config.
    Validate(ValidateArgs),
    /// Compress a DAG and write the compressed graph plus its edge map.
    Convert(ConvertArgs),
    /// Build the DAG of a combinatorial domain.
    Reduce(ReduceArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    EqualLength,
    Augmented,
    Compressed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::EqualLength => Mode::EqualLength,
            ModeArg::Augmented => Mode::Augmented,
            ModeArg::Compressed => Mode::Compressed,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Ftrl,
    Exp3Ix,
    Exp3Paths,
    Uniform,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AdversaryArg {
    Stochastic,
    Adaptive,
    LowerBound,
    Fixed,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// DAG file (text `n m src dst` + edges, or JSON).
    #[arg(long, conflicts_with = "graph")]
    dag: Option<PathBuf>,
    /// Built-in graph: example, routes:K, hypercube:D, multitask:D1,D2,..,
    /// mset:D,M or random:N,P,SEED.
    #[arg(long, default_value = "example")]
    graph: String,
}

impl GraphArgs {
    fn spec(&self) -> Result<GraphSpec, Failure> {
        if let Some(p) = &self.dag {
            return Ok(GraphSpec::File { path: p.clone() });
        }
        parse_graph_name(&self.graph)
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Failure::usage(format!("bad {what} value `{t}`")))
        })
        .collect()
}

fn parse_graph_name(s: &str) -> Result<GraphSpec, Failure> {
    let (name, arg) = s.split_once(':').unwrap_or((s, ""));
    let need = |n: usize, v: &[f64]| {
        if v.len() == n {
            Ok(())
        } else {
            Err(Failure::usage(format!("--graph {name} takes {n} parameter(s)")))
        }
    };
    let nums = || parse_list::<f64>(arg, "--graph");
    Ok(match name {
        "example" => GraphSpec::Example,
        "routes" => {
            let v = nums()?;
            need(1, &v)?;
            GraphSpec::ParallelRoutes { routes: v[0] as usize }
        }
        "hypercube" => {
            let v = nums()?;
            need(1, &v)?;
            GraphSpec::Hypercube { d: v[0] as usize }
        }
        "multitask" => GraphSpec::Multitask {
            dims: parse_list(arg, "--graph")?,
        },
        "mset" => {
            let v = nums()?;
            need(2, &v)?;
            GraphSpec::Mset {
                d: v[0] as usize,
                m: v[1] as usize,
            }
        }
        "random" => {
            let v = nums()?;
            need(3, &v)?;
            GraphSpec::Random {
                vertices: v[0] as usize,
                edge_prob: v[1],
                seed: v[2] as u64,
            }
        }
        _ => return Err(Failure::usage(format!("unknown graph `{s}`"))),
    })
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value = "ftrl")]
    algorithm: AlgorithmArg,
    /// Learner domain (ftrl only).
    #[arg(long, value_enum, default_value = "compressed")]
    mode: ModeArg,
    /// Horizon T.
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    /// Confidence level δ, in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Learning rate η [default: 1/√T].
    #[arg(long)]
    eta: Option<f64>,
    /// Uniform exploration γ [default: √(K·log₂(5(|V|+|E|+K)/δ)/(|E|·T)),
    /// K the longest path length].
    #[arg(long)]
    gamma: Option<f64>,
    /// Per-task exploration on a multitask graph (ftrl only).
    #[arg(long)]
    multitask_gamma: bool,
    /// Solver tolerance [default: min(1/T², 1e-7)].
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "stochastic")]
    adversary: AdversaryArg,
    /// Mean gap around the planted best path (stochastic).
    #[arg(long, default_value_t = 0.2)]
    gap: f64,
    /// Path-level noise amplitude (stochastic).
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Loss placed on the most played path (adaptive).
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
    /// Edge losses `edge_index,weight`: the fixed loss (fixed) or the edge
    /// means (stochastic, replacing --gap).
    #[arg(long)]
    losses: Option<PathBuf>,
    /// Path cap for path-enumerating baselines.
    #[arg(long, default_value_t = 5000)]
    cap: usize,
    /// Directory for config.json, trajectory.csv, paths.csv, summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stdout format: per-round trajectory (csv) or run summary (json).
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stdout format: regret curves (csv) or the summary (json).
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// DAG file to check.
    #[arg(long, required_unless_present = "config")]
    dag: Option<PathBuf>,
    /// Edge losses to check against the [-1, 1] path-weight range.
    #[arg(long, requires = "dag")]
    losses: Option<PathBuf>,
    /// Experiment config to check.
    #[arg(long, conflicts_with = "dag")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    /// Input DAG file.
    #[arg(long)]
    dag: PathBuf,
    /// Compressed DAG output [default: <input stem>.compressed.dag].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Edge map output, compressed edge index to original edge indices
    /// [default: <input stem>.sigma.json].
    #[arg(long)]
    sigma: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Domain {
    Hypercube,
    Multitask,
    Mset,
    Walk,
    Blotto,
    Efg,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long, value_enum)]
    domain: Domain,
    /// Dimension d (hypercube, mset).
    #[arg(long)]
    d: Option<usize>,
    /// Subset size m (mset).
    #[arg(long)]
    m: Option<usize>,
    /// Arms per task, comma separated (multitask).
    #[arg(long)]
    dims: Option<String>,
    /// Vertex count of the base graph (walk).
    #[arg(long)]
    vertices: Option<usize>,
    /// Base edges `u-v,u-v,...` (walk).
    #[arg(long)]
    edges: Option<String>,
    /// Walk start (walk).
    #[arg(long)]
    source: Option<usize>,
    /// Walk target (walk).
    #[arg(long)]
    target: Option<usize>,
    /// Maximum number of steps K (walk).
    #[arg(long)]
    steps: Option<usize>,
    /// Soldiers N (blotto).
    #[arg(long)]
    soldiers: Option<usize>,
    /// Battlefields K (blotto).
    #[arg(long)]
    fields: Option<usize>,
    /// Game tree JSON (efg).
    #[arg(long)]
    game: Option<PathBuf>,
    /// DAG output file; without it, DAG and metadata go to stdout as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata output [default: <out>.meta.json].
    #[arg(long, requires = "out")]
    meta: Option<PathBuf>,
}

/// An error with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 1, msg: msg.into() }
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }
}

fn core_code(e: &dagbandit::Error) -> u8 {
    use dagbandit::Error::*;
    match e {
        InvalidParameter { .. } => 1,
        SolverStall { .. } | Infeasible | NonPositiveCoordinate { .. } => 3,
        _ => 2,
    }
}

impl From<dagbandit::Error> for Failure {
    fn from(e: dagbandit::Error) -> Self {
        Failure { code: core_code(&e), msg: e.to_string() }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let code = match &e {
            HarnessError::Core(c) => core_code(c),
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::invalid(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::invalid(format!("json error: {e}"))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn read_dag(path: &Path) -> Result<Dag, Failure> {
    parse_dag(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn check_delta(delta: f64) -> Result<(), Failure> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "invalid --delta (δ): must lie in (0, 1), got {delta}"
        )))
    }
}

/// Fully resolved learner parameters for the config echo.
fn schedule_echo(
    dag: &Dag,
    alg: &AlgorithmSpec,
    graph: &GraphSpec,
    horizon: usize,
    delta: f64,
    seed: u64,
) -> Result<serde_json::Value, Failure> {
    let AlgorithmSpec::Ftrl { mode, eta, gamma, multitask_gamma, tol, .. } = alg else {
        return Ok(serde_json::Value::Null);
    };
    let mut cfg = LearnerConfig::new(*mode, horizon, delta, seed);
    cfg.eta = *eta;
    cfg.tol = *tol;
    if let Some(g) = gamma {
        cfg.gamma = Some(dagbandit::GammaOverride::Uniform(*g));
    }
    if *multitask_gamma {
        if let GraphSpec::Multitask { dims } = graph {
            cfg.gamma = Some(dagbandit::GammaOverride::PerCoordinate(
                Multitask::new(dims)?.gamma_override(horizon, delta)?,
            ));
        }
    }
    let learner = Learner::new(dag, cfg)?;
    let s = learner.schedule();
    let gamma_echo = if s.gamma.iter().chain(&s.gamma_hat).all(|g| *g == s.gamma[0]) {
        json!(s.gamma[0])
    } else {
        json!({ "vertices_edges": s.gamma, "bits": s.gamma_hat })
    };
    Ok(json!({
        "eta": s.eta,
        "gamma": gamma_echo,
        "tol": s.tol,
        "working_vertices": learner.working_dag().num_vertices(),
        "working_edges": learner.working_dag().num_edges(),
    }))
}

fn cmd_run(a: RunArgs, verbose: bool) -> Result<(), Failure> {
    check_delta(a.delta)?;
    if a.horizon == 0 {
        return Err(Failure::usage("invalid --horizon (T): must be at least 1"));
    }
    if let Some(t) = a.tol {
        if !(t > 0.0) {
            return Err(Failure::usage(format!("invalid --tol: must be positive, got {t}")));
        }
        if a.algorithm != AlgorithmArg::Ftrl {
            return Err(Failure::usage("--tol applies to the ftrl algorithm only"));
        }
    }
    let graph = a.graph.spec()?;
    let dag = graph.build()?;
    let algorithm = match a.algorithm {
        AlgorithmArg::Ftrl => AlgorithmSpec::Ftrl {
            mode: a.mode.into(),
            eta: a.eta,
            gamma: a.gamma,
            multitask_gamma: a.multitask_gamma,
            tol: a.tol,
            label: None,
        },
        AlgorithmArg::Exp3Ix => AlgorithmSpec::Exp3Ix { label: None },
        AlgorithmArg::Exp3Paths => AlgorithmSpec::Exp3Paths { cap: Some(a.cap), label: None },
        AlgorithmArg::Uniform => AlgorithmSpec::Uniform { cap: Some(a.cap), label: None },
    };
    let file_losses = match &a.losses {
        Some(p) => Some(parse_loss_csv(&read(p)?, dag.num_edges())?),
        None => None,
    };
    let adversary = match a.adversary {
        AdversaryArg::Stochastic => match file_losses {
            Some(means) => AdversarySpec::Stochastic { means: Some(means), gap: None, best_path: None, noise: a.noise },
            None => AdversarySpec::Stochastic { means: None, gap: Some(a.gap), best_path: None, noise: a.noise },
        },
        AdversaryArg::Adaptive => AdversarySpec::Adaptive { magnitude: a.magnitude },
        AdversaryArg::LowerBound => AdversarySpec::MultitaskLowerBound,
        AdversaryArg::Fixed => AdversarySpec::Fixed {
            losses: file_losses.ok_or_else(|| Failure::usage("--adversary fixed needs --losses"))?,
        },
    };
    let config = ExperimentConfig {
        graph: graph.clone(),
        horizon: a.horizon,
        delta: a.delta,
        seeds: vec![a.seed],
        algorithms: vec![algorithm.clone()],
        adversaries: vec![adversary.clone()],
        output_dir: None,
        checkpoints: 100,
    };
    config.validate()?;
    let echo = json!({
        "command": "run",
        "graph": graph,
        "vertices": dag.num_vertices(),
        "edges": dag.num_edges(),
        "horizon": a.horizon,
        "delta": a.delta,
        "seed": a.seed,
        "algorithm": algorithm,
        "adversary": adversary,
        "schedule": schedule_echo(&dag, &algorithm, &graph, a.horizon, a.delta, a.seed)?,
    });
    eprintln!("config: {echo}");
    let result = run_single(&config, &dag, &algorithm, &adversary, a.seed)?;
    if verbose {
        eprintln!(
            "regret {:.6} over {} rounds in {:.2} s",
            result.report.regret, a.horizon, result.report.wall_clock_secs
        );
    }
    if let Some(dir) = &a.out {
        result.persist(dir, &echo)?;
    }
    match a.format {
        Format::Csv => print!("{}", result.trajectory_csv()?),
        Format::Json => println!("{}", serde_json::to_string_pretty(&result.summary())?),
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs, verbose: bool) -> Result<(), Failure> {
    let mut config = ExperimentConfig::load(&a.config)?;
    if let Some(out) = a.out {
        config.output_dir = Some(out);
    }
    let dag = config.graph.build()?;
    let schedules = config
        .algorithms
        .iter()
        .map(|alg| {
            let s = schedule_echo(&dag, alg, &config.graph, config.horizon, config.delta, 0)?;
            Ok(json!({ "algorithm": alg.label(), "schedule": s }))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    eprintln!(
        "config: {}",
        json!({ "command": "sweep", "config": config, "runs": config.num_runs(), "schedules": schedules })
    );
    let (summary, results) = run_experiment(&config)?;
    if verbose {
        for g in &summary.groups {
            eprintln!(
                "{} vs {}: median regret {:.4} over {} runs",
                g.algorithm, g.adversary, g.median_regret, g.runs
            );
        }
    }
    match a.format {
        Format::Csv => print!("{}", curves_csv(&config, &results)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&summary)?),
    }
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    let report = if let Some(p) = &a.config {
        let config = ExperimentConfig::load(p)?;
        let dag = config.graph.build()?;
        json!({
            "config": p,
            "valid": true,
            "runs": config.num_runs(),
            "vertices": dag.num_vertices(),
            "edges": dag.num_edges(),
        })
    } else {
        let p = a.dag.as_ref().expect("clap requires --dag or --config");
        let dag = read_dag(p)?;
        let (pruned, _) = dag.prune_with_map()?;
        let (lo, hi) = pruned.path_length_range()?;
        let mut out = json!({
            "dag": p,
            "valid": true,
            "vertices": dag.num_vertices(),
            "edges": dag.num_edges(),
            "pruned": dag.is_pruned(),
            "pruned_vertices": pruned.num_vertices(),
            "pruned_edges": pruned.num_edges(),
            "paths": pruned.num_paths().to_string(),
            "min_path_length": lo,
            "max_path_length": hi,
        });
        if let Some(lp) = &a.losses {
            let w = parse_loss_csv(&read(lp)?, dag.num_edges())
                .map_err(|e| Failure::invalid(format!("{}: {e}", lp.display())))?;
            let (wlo, whi) = dag.path_weight_range(&w)?;
            dag.check_loss_range(&w)?;
            out["losses"] = json!({ "file": lp, "min_path_weight": wlo, "max_path_weight": whi });
        }
        out
    };
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            println!("key,value");
            if let serde_json::Value::Object(m) = &report {
                for (k, v) in m {
                    if !v.is_object() {
                        println!("{k},{}", v.to_string().trim_matches('"'));
                    }
                }
            }
        }
    }
    Ok(())
}

fn sibling(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map_or_else(|| "dag".into(), |s| s.to_string_lossy().into_owned());
    input.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_convert(a: ConvertArgs, verbose: bool) -> Result<(), Failure> {
    let dag = read_dag(&a.dag)?;
    let (pruned, _) = dag.prune_with_map()?;
    if pruned.num_vertices() != dag.num_vertices() || pruned.num_edges() != dag.num_edges() {
        return Err(Failure::invalid(
            "input graph has vertices or edges off every source-sink path; prune it first",
        ));
    }
    let c = compress(&dag)?;
    let (g, map) = c.gdag.prune_with_map()?;
    let sigma: serde_json::Map<String, serde_json::Value> = (0..g.num_edges())
        .map(|e| (e.to_string(), json!(c.sigma[map.edge_back[e]])))
        .collect();
    let out = a.out.unwrap_or_else(|| sibling(&a.dag, ".compressed.dag"));
    let sigma_path = a.sigma.unwrap_or_else(|| sibling(&a.dag, ".sigma.json"));
    let text = if out.extension().is_some_and(|e| e == "json") {
        serde_json::to_string_pretty(&dag_to_json(&g))? + "\n"
    } else {
        dag_to_text(&g)
    };
    write(&out, &text)?;
    write(&sigma_path, &(serde_json::to_string_pretty(&sigma)? + "\n"))?;
    if verbose {
        eprintln!(
            "compressed {}x{} into {}x{}; longest path {} -> {}",
            dag.num_vertices(),
            dag.num_edges(),
            g.num_vertices(),
            g.num_edges(),
            dag.path_length_range()?.1,
            g.path_length_range()?.1
        );
    }
    println!("{}", out.display());
    println!("{}", sigma_path.display());
    Ok(())
}

fn need<T: Copy>(v: Option<T>, flag: &str, domain: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::usage(format!("--domain {domain} needs {flag}")))
}

fn cmd_reduce(a: ReduceArgs) -> Result<(), Failure> {
    let (dag, meta): (Dag, serde_json::Value) = match a.domain {
        Domain::Hypercube => {
            let r = Hypercube::new(need(a.d, "--d", "hypercube")?)?;
            (r.dag().clone(), r.metadata())
        }
        Domain::Mset => {
            let r = MSets::new(need(a.d, "--d", "mset")?, need(a.m, "--m", "mset")?)?;
            (r.dag().clone(), r.metadata())
        }
        Domain::Multitask => {
            let dims = a.dims.as_deref().ok_or_else(|| Failure::usage("--domain multitask needs --dims"))?;
            let r = Multitask::new(&parse_list::<usize>(dims, "--dims")?)?;
            (r.dag().clone(), r.metadata())
        }
        Domain::Walk => {
            let spec = a.edges.as_deref().ok_or_else(|| Failure::usage("--domain walk needs --edges"))?;
            let edges = spec
                .split(',')
                .map(|p| {
                    let (u, v) = p
                        .trim()
                        .split_once('-')
                        .ok_or_else(|| Failure::usage(format!("bad edge `{p}`, expected u-v")))?;
                    let u = u.parse().map_err(|_| Failure::usage(format!("bad edge `{p}`")))?;
                    let v = v.parse().map_err(|_| Failure::usage(format!("bad edge `{p}`")))?;
                    Ok((u, v))
                })
                .collect::<Result<Vec<(usize, usize)>, Failure>>()?;
            let r = ShortestWalk::new(
                need(a.vertices, "--vertices", "walk")?,
                edges,
                need(a.source, "--source", "walk")?,
                need(a.target, "--target", "walk")?,
                need(a.steps, "--steps", "walk")?,
            )?;
            (r.dag().clone(), r.metadata())
        }
        Domain::Blotto => {
            let r = Blotto::new(need(a.soldiers, "--soldiers", "blotto")?, need(a.fields, "--fields", "blotto")?)?;
            (r.dag().clone(), r.metadata())
        }
        Domain::Efg => {
            let p = a.game.as_ref().ok_or_else(|| Failure::usage("--domain efg needs --game"))?;
            let r = Efg::new(EfgGame::from_json(&read(p)?)?)?;
            (r.dag().clone(), r.metadata())
        }
    };
    match &a.out {
        Some(out) => {
            let meta_path = a.meta.clone().unwrap_or_else(|| sibling(out, ".meta.json"));
            write(out, &dag_to_text(&dag))?;
            write(&meta_path, &(serde_json::to_string_pretty(&meta)? + "\n"))?;
            println!("{}", out.display());
            println!("{}", meta_path.display());
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "dag": dag_to_json(&dag), "metadata": meta }))?
        ),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let verbose = cli.verbose;
    let res = match cli.command {
        Command::Run(a) => cmd_run(a, verbose),
        Command::Sweep(a) => cmd_sweep(a, verbose),
        Command::Validate(a) => cmd_validate(a),
        Command::Convert(a) => cmd_convert(a, verbose),
        Command::Reduce(a) => cmd_reduce(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
