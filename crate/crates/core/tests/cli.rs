//! End-to-end checks of the command-line interface: exit codes, output
//! determinism, and the sweep CSV contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_swipt-aoa")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn probs_prints_reference_values() {
    let out = run(&["probs", data("setup1.json").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("0.6153815230"));
    assert!(text.contains("0.2326631845"));
}

#[test]
fn metrics_emits_machine_record() {
    let out = run(&["metrics", data("setup2.json").to_str().unwrap()]);
    assert!(out.status.success());
    let json_line = stdout(&out).lines().last().unwrap().to_string();
    let record: serde_json::Value = serde_json::from_str(&json_line).unwrap();
    assert!((record["mean_aoi"].as_f64().unwrap() - 2.9753235933).abs() < 1e-9);
}

#[test]
fn simulate_is_bit_identical_for_fixed_seed() {
    let scenario = data("setup1.json");
    let args = [
        "simulate",
        scenario.to_str().unwrap(),
        "--horizon",
        "20000",
        "--replications",
        "4",
        "--seed",
        "123",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "simulate",
        scenario.to_str().unwrap(),
        "--horizon",
        "20000",
        "--replications",
        "4",
        "--seed",
        "124",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sweep_csv_contract() {
    let out = run(&[
        "sweep",
        data("setup1.json").to_str().unwrap(),
        "--metric",
        "mean-aoi",
        "--step",
        "0.5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "q1,q2,value,energy_limited");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    // Row-major: q1 varies slowest.
    let q1s: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(q1s, ["0", "0", "0", "0.5", "0.5", "0.5", "1", "1", "1"]);
    // Minimum of the parsed CSV sits at (1, 0) with value 1/p_d1.
    let best = rows
        .iter()
        .filter(|r| r[2] != "inf")
        .min_by(|a, b| {
            a[2].parse::<f64>().unwrap().partial_cmp(&b[2].parse::<f64>().unwrap()).unwrap()
        })
        .unwrap();
    assert_eq!((best[0], best[1]), ("1", "0"));
    assert!((best[2].parse::<f64>().unwrap() - 1.0000001).abs() < 1e-6);
    assert!(["true", "false"].contains(&best[3]));
}

#[test]
fn sweep_writes_file() {
    let dir = std::env::temp_dir().join("swipt-aoa-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let out = run(&[
        "sweep",
        data("setup2.json").to_str().unwrap(),
        "--metric",
        "poma",
        "--step",
        "0.25",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 25);
}

#[test]
fn invalid_policy_exits_1_and_names_field() {
    let dir = std::env::temp_dir().join("swipt-aoa-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    let mut scenario: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data("setup1.json")).unwrap()).unwrap();
    scenario["policy"]["q1"] = serde_json::json!(2.0);
    std::fs::write(&path, serde_json::to_string(&scenario).unwrap()).unwrap();
    let out = run(&["metrics", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q1"));
}

#[test]
fn missing_file_exits_3() {
    let out = run(&["metrics", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn optimize_matches_sweep_and_reports_infeasible() {
    let out = run(&[
        "optimize",
        data("setup2.json").to_str().unwrap(),
        "--problem",
        "mean-aoa",
        "--verify-grid",
        "0.05",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("q1*      = 1.0000000000"));
    assert!(text.contains("feasible = true"));

    // An unreachable AoA bound: infeasible, exit 2, unconstrained optimum shown.
    let out = run(&[
        "optimize",
        data("setup2.json").to_str().unwrap(),
        "--problem",
        "aoi-st-aoa",
        "--delta",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("feasible = false"));

    // Constrained problems demand --delta.
    let out = run(&[
        "optimize",
        data("setup1.json").to_str().unwrap(),
        "--problem",
        "poma-st-aoi",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reproduce_exit_codes() {
    let out = run(&["reproduce", "table1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).matches("[PASS]").count(), 8);

    let out = run(&["reproduce", "table2"]);
    assert!(out.status.success());

    // Four documented PoMA caption coordinates fail on purpose, so the
    // captions target reports a mismatch.
    let out = run(&["reproduce", "captions"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout(&out).matches("[FAIL]").count(), 4);
}
