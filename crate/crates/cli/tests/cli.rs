use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dagbandit::format::parse_dag;
use dagbandit::generators::example_dag;
use dagbandit::PathIncidence;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dagbandit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_well_formed_dag() {
    for f in ["example.dag", "example.json"] {
        let o = run(&["validate", "--dag", data(f).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["paths"], "10");
        assert_eq!(v["edges"], 13);
    }
}

#[test]
fn delta_out_of_range_is_a_usage_error_naming_delta() {
    let o = run(&["run", "--delta", "2", "--horizon", "5"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("δ"), "{}", stderr(&o));
}

#[test]
fn unknown_flags_and_missing_values_exit_1() {
    assert_eq!(code(&run(&["run", "--bogus"])), 1);
    assert_eq!(code(&run(&["reduce", "--domain", "mset", "--d", "4"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&[])), 1);
}

#[test]
fn help_lists_schedule_defaults() {
    for sub in ["run", "sweep", "validate", "convert", "reduce"] {
        let o = run(&[sub, "--help"]);
        assert_eq!(code(&o), 0);
        assert!(!o.stdout.is_empty());
    }
    let help = String::from_utf8(run(&["run", "--help"]).stdout).unwrap();
    for needle in ["1/√T", "min(1/T², 1e-7)", "log₂(5(|V|+|E|+K)/δ)", "[default: 0.05]", "--seed"] {
        assert!(help.contains(needle), "missing {needle}");
    }
}

#[test]
fn run_echoes_resolved_schedule() {
    let o = run(&["run", "--horizon", "100", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let err = stderr(&o);
    let line = err.lines().find(|l| l.starts_with("config: ")).unwrap();
    let echo: serde_json::Value = serde_json::from_str(&line["config: ".len()..]).unwrap();
    assert_eq!(echo["schedule"]["eta"], 0.1);
    assert_eq!(echo["schedule"]["tol"], 1e-7);
    assert!(echo["schedule"]["gamma"].as_f64().unwrap() > 0.0);
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}"));
        let o = run(&[
            "run", "--horizon", "300", "--seed", "7", "--adversary", "adaptive", "--magnitude", "0.5",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outs.push((o.stdout, out));
    }
    assert_eq!(outs[0].0, outs[1].0);
    for f in ["trajectory.csv", "paths.csv", "config.json"] {
        assert_eq!(
            fs::read(outs[0].1.join(f)).unwrap(),
            fs::read(outs[1].1.join(f)).unwrap(),
            "{f}"
        );
    }
    let other = run(&["run", "--horizon", "300", "--seed", "8", "--adversary", "adaptive", "--magnitude", "0.5"]);
    assert_ne!(outs[0].0, other.stdout);
}

#[test]
fn out_of_range_losses_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    // Path A-B-E-F-H has four edges at 0.3 each.
    fs::write(&bad, "edge_index,weight\n0,0.3\n3,0.3\n9,0.3\n11,0.3\n").unwrap();
    let dag = data("example.dag");
    let o = run(&["validate", "--dag", dag.to_str().unwrap(), "--losses", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let good = dir.path().join("good.csv");
    fs::write(&good, "0,0.2\n3,-0.2\n").unwrap();
    let o = run(&["validate", "--dag", dag.to_str().unwrap(), "--losses", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&[
        "run", "--adversary", "fixed", "--losses", bad.to_str().unwrap(), "--dag", dag.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_dag_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cyc.dag");
    fs::write(&p, "3 3 0 2\n0 1\n1 0\n1 2\n").unwrap();
    let o = run(&["validate", "--dag", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("cycle"));
}

#[test]
fn convert_round_trips_through_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.dag");
    let sigma = dir.path().join("g.sigma.json");
    let o = run(&[
        "convert", "--dag", data("example.dag").to_str().unwrap(),
        "--out", out.to_str().unwrap(), "--sigma", sigma.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g = parse_dag(&fs::read_to_string(&out).unwrap()).unwrap();
    let table: std::collections::BTreeMap<usize, Vec<usize>> =
        serde_json::from_str(&fs::read_to_string(&sigma).unwrap()).unwrap();
    assert_eq!(table.len(), g.num_edges());
    let orig = example_dag();
    let mut projected: Vec<Vec<usize>> = g
        .enumerate_paths(100)
        .unwrap()
        .iter()
        .map(|p| {
            let edges: Vec<usize> = p.edges.iter().flat_map(|e| table[e].clone()).collect();
            PathIncidence::from_edges(&orig, edges).unwrap().edges
        })
        .collect();
    projected.sort();
    projected.dedup();
    assert_eq!(projected.len(), 10);
}

#[test]
fn reduce_every_domain() {
    let dir = tempfile::tempdir().unwrap();
    let game = data("efg_example.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["--domain", "hypercube", "--d", "3"],
        vec!["--domain", "mset", "--d", "5", "--m", "2"],
        vec!["--domain", "multitask", "--dims", "2,4,8"],
        vec!["--domain", "walk", "--vertices", "3", "--edges", "0-1,1-0,0-2", "--source", "0", "--target", "2", "--steps", "3"],
        vec!["--domain", "blotto", "--soldiers", "4", "--fields", "3"],
        vec!["--domain", "efg", "--game", game.to_str().unwrap()],
    ];
    let expected_paths = [8u32, 10, 64, 2, 15, 8];
    for (args, want) in cases.iter().zip(expected_paths) {
        let mut full = vec!["reduce"];
        full.extend(args);
        let o = run(&full);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let dag: dagbandit::format::DagJson = serde_json::from_value(v["dag"].clone()).unwrap();
        let text = serde_json::to_string(&dag).unwrap();
        let d = parse_dag(&text).unwrap();
        assert_eq!(d.num_paths(), want.into(), "{args:?}");
        assert!(v["metadata"].is_object());
    }
    let out = dir.path().join("h.dag");
    let o = run(&["reduce", "--domain", "hypercube", "--d", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("h.meta.json").exists());
    let o = run(&["reduce", "--domain", "walk", "--vertices", "3", "--edges", "0-1", "--source", "0", "--target", "2", "--steps", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_writes_run_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"graph": {"kind": "parallel-routes", "routes": 3}, "horizon": 50, "seeds": [1, 2, 3],
            "algorithms": [{"name": "ftrl", "mode": "equal-length"}, {"name": "uniform"}],
            "adversaries": [{"kind": "stochastic", "gap": 0.2, "noise": 0.05}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["groups"].as_array().unwrap().len(), 2);
    assert_eq!(summary["runs"].as_array().unwrap().len(), 6);
    let dirs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(dirs, 6);
    assert!(out.join("curves.csv").exists());

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"graph": {"kind": "example"}, "horizon": 5, "seeds": [0],
            "algorithms": [{"name": "magic"}], "adversaries": [{"kind": "adaptive", "magnitude": 0.5}]}"#,
    )
    .unwrap();
    let o = run(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("algorithms"), "{}", stderr(&o));
}
