use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stable-knapsack"));
    cmd.env_remove("STABLE_KNAPSACK_TOLERANCE");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok_stdout(args)).unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["gen", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    ok_stdout(&args);
    path
}

fn items(path: &Path) -> usize {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["items"].as_array().unwrap().len()
}

#[test]
fn gen_families() {
    let dir = TempDir::new().unwrap();
    assert_eq!(items(&gen(dir.path(), "p.json", &["--family", "prop2", "--k", "4"])), 8);
    assert_eq!(items(&gen(dir.path(), "l.json", &["--family", "lowerbound", "--eps", "0.04"])), 5);
    assert_eq!(items(&gen(dir.path(), "r.json", &["--family", "random", "--n", "0", "--seed", "1"])), 0);
    let s = gen(dir.path(), "s.json", &["--family", "simple-random", "--n", "6", "--seed", "2"]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(s).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    for it in v["items"].as_array().unwrap() {
        assert_eq!(it["value"], it["weight"]);
    }
    let bad = run(&["gen", "--family", "lowerbound", "--eps", "0.2"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn solve_greedy_on_doubling_instance() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "p.json", &["--family", "prop2", "--k", "4"]);
    let v = json(&["solve", p.to_str().unwrap(), "--alg", "greedy", "--json"]);
    assert_eq!(v["solution"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["schema_version"], 1);
    assert!(v["seed"].is_u64());
}

#[test]
fn solve_empty_instance() {
    let dir = TempDir::new().unwrap();
    let e = gen(dir.path(), "e.json", &["--family", "random", "--n", "0", "--seed", "0"]);
    for alg in ["greedy", "modified-greedy", "stable", "fpras", "simple"] {
        let v = json(&["solve", e.to_str().unwrap(), "--alg", alg, "--json", "--seed", "1"]);
        assert_eq!(v["solution"], serde_json::json!([]), "{alg}");
    }
}

#[test]
fn solve_is_reproducible_given_seed() {
    let dir = TempDir::new().unwrap();
    let r = gen(dir.path(), "r.json", &["--family", "random", "--n", "9", "--seed", "5"]);
    let args = ["solve", r.to_str().unwrap(), "--alg", "stable", "--seed", "42", "--json"];
    assert_eq!(ok_stdout(&args), ok_stdout(&args));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"weight_limit": 1, "items": [{"id": 1, "value": 1, "weight": 0}]}"#).unwrap();
    assert_eq!(run(&["solve", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["solve", missing.to_str().unwrap()]).status.code(), Some(2));
    let p = gen(dir.path(), "p.json", &["--family", "prop2", "--k", "4"]);
    let p = p.to_str().unwrap();
    assert_eq!(run(&["solve", p, "--alg", "simple"]).status.code(), Some(3));
    assert_eq!(run(&["solve", p, "--alg", "stable", "--eps", "1.5"]).status.code(), Some(3));
    assert_eq!(run(&["solve", p, "--alg", "nonsense"]).status.code(), Some(2));
    let out = bin()
        .args(["solve", p, "--alg", "greedy"])
        .env("STABLE_KNAPSACK_TOLERANCE", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["solve", p, "--alg", "greedy"])
        .env("STABLE_KNAPSACK_TOLERANCE", "1e-6")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn greedy_sensitivity_on_doubling_instance() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "p.json", &["--family", "prop2", "--k", "50"]);
    let v = json(&["sensitivity", p.to_str().unwrap(), "--alg", "greedy", "--trials", "1"]);
    assert_eq!(v["report"]["average"], 25.5);
    assert_eq!(v["report"]["method"], "exact");
    let csv = ok_stdout(&["sensitivity", p.to_str().unwrap(), "--alg", "greedy", "--out", "csv", "--trials", "1"]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("0.0")));
}

#[test]
fn sensitivity_randomized_writes_file() {
    let dir = TempDir::new().unwrap();
    let r = gen(dir.path(), "r.json", &["--family", "random", "--n", "6", "--seed", "3"]);
    let out = dir.path().join("rep.json");
    ok_stdout(&[
        "sensitivity",
        r.to_str().unwrap(),
        "--alg",
        "modified-greedy",
        "--eps",
        "0.3",
        "--trials",
        "200",
        "--seed",
        "9",
        "--threads",
        "2",
        "-o",
        out.to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["report"]["method"], "coupled_mc");
    assert_eq!(v["report"]["per_deletion"].as_array().unwrap().len(), 6);
    assert_eq!(v["seed"], 9);
}

#[test]
fn stream_reports() {
    let dir = TempDir::new().unwrap();
    let one = gen(dir.path(), "one.json", &["--family", "random", "--n", "1", "--seed", "4"]);
    let v = json(&["stream", one.to_str().unwrap(), "--seed", "1"]);
    let steps = v["streams"][0]["per_step"].as_array().unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(v["streams"][0]["amortized_recourse"], steps[0]["hamming"].as_f64().unwrap());

    let r = gen(dir.path(), "r.json", &["--family", "random", "--n", "12", "--seed", "4"]);
    let args = ["stream", r.to_str().unwrap(), "--seed", "8", "--alg", "stable", "--mode", "decr"];
    let a = json(&args);
    let b = json(&args);
    let strip = |v: &Value| {
        let s = &v["streams"][0];
        let steps: Vec<_> = s["per_step"].as_array().unwrap().iter().map(|p| p["hamming"].clone()).collect();
        (s["order"].clone(), steps, s["amortized_recourse"].clone())
    };
    assert_eq!(strip(&a), strip(&b));
    let (_, hams, amortized) = strip(&a);
    let mean = hams.iter().map(|h| h.as_f64().unwrap()).sum::<f64>() / hams.len() as f64;
    assert_eq!(amortized.as_f64().unwrap(), mean);

    let csv = ok_stdout(&["stream", r.to_str().unwrap(), "--seed", "8", "--streams", "3", "--out", "csv"]);
    assert_eq!(csv.lines().count(), 1 + 3 * 12);
}
