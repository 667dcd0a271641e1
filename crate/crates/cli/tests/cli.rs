use std::process::{Command, Output};

use serde_json::Value;

fn rep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rep")).args(args).env_remove("REP_WORKERS").output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = rep(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

const COMMANDS: &[&[&str]] = &[
    &[],
    &["rep"],
    &["rep", "run"],
    &["rep", "mes"],
    &["rep", "audit"],
    &["compile"],
    &["graph"],
    &["graph", "color"],
    &["graph", "lc-orbit"],
    &["graph", "lc-equiv"],
    &["purify"],
    &["purify", "threshold"],
    &["purify", "sweep"],
    &["purify", "variants"],
    &["ppt"],
    &["ppt", "wstate"],
    &["lme"],
    &["lme", "send"],
];

#[test]
fn every_command_has_help() {
    for cmd in COMMANDS {
        let mut args = cmd.to_vec();
        args.push("--help");
        let out = rep(&args);
        assert!(out.status.success(), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("Usage: rep"), "{args:?}: {text}");
        if cmd.len() == 2 {
            assert!(text.contains("--seed"), "{args:?} lacks --seed");
        }
    }
}

#[test]
fn rep_run_reports() {
    let r = ok_json(&["rep", "run", "--n", "3", "--random", "--seed", "4"]);
    assert_eq!(r["cbits"], 5);
    assert_eq!(r["ebits"], 3.0);
    assert!(r["fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
    let r = ok_json(&["rep", "run", "--n", "2", "--angles", "0.7853981633974483"]);
    assert_eq!(r["ebits"], 1.0);
    assert_eq!(r["cbits"], 1);
    let r = ok_json(&["rep", "mes", "--angles", "0.1,-0.2,0.3"]);
    assert_eq!(r["cbits"], 3);
    assert_eq!(r["ebits"], 2.0);
}

#[test]
fn bad_inputs_exit_with_error() {
    assert!(!rep(&["rep", "run", "--n", "7", "--random"]).status.success());
    assert!(!rep(&["rep", "run", "--n", "3", "--angles", "1,2"]).status.success());
    assert!(!rep(&["purify", "threshold", "--graph", "rep8", "--tol", "0"]).status.success());
    assert!(!rep(&["graph", "color", "--graph", "/nonexistent.json"]).status.success());
}

#[test]
fn outputs_are_reproducible() {
    for args in [
        &["rep", "run", "--n", "3", "--random", "--runs", "5", "--seed", "9", "--format", "csv"][..],
        &["rep", "audit", "--runs", "300", "--seed", "2"],
        &["purify", "sweep", "--graph", "mes6", "--q", "1,0.99", "--p", "0.4:0.5:0.05"],
    ] {
        let (a, b) = (rep(args), rep(args));
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = rep(&["rep", "run", "--n", "3", "--random", "--seed", "1"]).stdout;
    let b = rep(&["rep", "run", "--n", "3", "--random", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn sweep_order_is_independent_of_workers() {
    let args = ["purify", "sweep", "--graph", "mes6", "--q", "1,0.97", "--p", "0.3:0.6:0.05"];
    let one = Command::new(env!("CARGO_BIN_EXE_rep")).args(args).env("REP_WORKERS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_rep")).args(args).env("REP_WORKERS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn purify_threshold_csv() {
    let out = rep(&["purify", "threshold", "--graph", "rep8", "--q", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.starts_with("# purify-threshold v1\ngraph,q,transmitted,p_star,iterations_at_threshold,seconds\n"));
    let p: f64 = csv_rows(&out)[0][3].parse().unwrap();
    assert!((p - 0.39).abs() < 0.02, "{p}");

    let out = rep(&["purify", "threshold", "--graph", "mes6", "--q", "0.97"]);
    let p: f64 = csv_rows(&out)[0][3].parse().unwrap();
    assert!((p - 0.45).abs() < 0.02, "{p}");
}

#[test]
fn graph_tools() {
    assert_eq!(ok_json(&["graph", "color", "--graph", "rep8"])["chromatic_number"], 3);
    let orbit = ok_json(&["graph", "lc-orbit", "--graph", "mes6", "--find-bipartite"]);
    assert_eq!(orbit["found"], true);
    let orbit = ok_json(&["graph", "lc-orbit", "--graph", "rep8", "--find-bipartite"]);
    assert_eq!(orbit["found"], false);
    assert_eq!(ok_json(&["graph", "lc-equiv", "--a", "mes6", "--b", "mes6"])["equivalent"], true);
    assert_eq!(ok_json(&["graph", "lc-equiv", "--a", "mes6", "--b", "rep8"])["equivalent"], false);

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"n": 4, "edges": []}"#).unwrap();
    assert_eq!(ok_json(&["graph", "color", "--graph", empty.to_str().unwrap()])["chromatic_number"], 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "edges": [[0, 5]]}"#).unwrap();
    assert!(!rep(&["graph", "color", "--graph", bad.to_str().unwrap()]).status.success());
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = rep(&["compile", "--n", "3", "-o", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let stdout = rep(&["compile", "--n", "3"]).stdout;
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
    let v: Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(v["protocol"]["qubits"], 8);
}

#[test]
fn ppt_boundary() {
    let v = ok_json(&["ppt", "wstate", "--samples", "3"]);
    assert!((v["boundary"].as_f64().unwrap() - 0.58).abs() < 0.01);
    assert_eq!(v["samples"].as_array().unwrap().len(), 3);
}

#[test]
fn lme_send_path_graph() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("path.json");
    let q = std::f64::consts::FRAC_PI_4;
    let mut gates = Vec::new();
    for (a, b) in [(0, 1), (1, 2), (2, 3)] {
        gates.push(serde_json::json!({ "support": [a], "angle": -q }));
        gates.push(serde_json::json!({ "support": [b], "angle": -q }));
        gates.push(serde_json::json!({ "support": [a, b], "angle": q }));
    }
    std::fs::write(&spec, serde_json::json!({ "n": 4, "gates": gates }).to_string()).unwrap();
    let s = spec.to_str().unwrap();
    for bits in ["0", "1", "2", "3"] {
        for seed in ["0", "1", "2"] {
            let v = ok_json(&["lme", "send", "--spec", s, "--bits", bits, "--seed", seed]);
            assert_eq!(v["delivered"], true);
        }
    }
    assert!(!rep(&["lme", "send", "--spec", s, "--bits", "7"]).status.success());
}
