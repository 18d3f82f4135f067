use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mde"))
        .args(args)
        .env_remove("MDE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fits_two_point_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("two.csv");
    fs::write(&data, "x,y\n1,1\n1,3\n").unwrap();
    let out = mde(&["fit", "--data", path(&data), "--response", "y"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["estimate"], serde_json::json!([2.0]));
    assert_eq!(report["loss"], 0.0);
    assert_eq!(report["converged"], true);
}

#[test]
fn fit_csv_output_has_header_and_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("two.csv");
    fs::write(&data, "x,y\n1,1\n1,3\n").unwrap();
    let out = mde(&["fit", "--data", path(&data), "--response", "1", "--out", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "b1,loss,sweeps,converged,elapsed_seconds");
    assert!(lines[1].starts_with("2.0,0.0,"));
}

#[test]
fn missing_response_is_a_usage_error() {
    let out = mde(&["fit", "--data", "whatever.csv"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bad_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "x,y\n1,abc\n").unwrap();
    assert_eq!(code(&mde(&["fit", "--data", path(&data), "--response", "y"])), 2);
    let missing = dir.path().join("absent.csv");
    assert_eq!(code(&mde(&["fit", "--data", path(&missing), "--response", "y"])), 2);
}

#[test]
fn sweep_budget_exhaustion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    let sim = mde(&["simulate", "--n", "100", "--p", "4", "--seed", "3", "--out", path(&data)]);
    assert_eq!(code(&sim), 0);
    let out = mde(&["fit", "--data", path(&data), "--response", "y", "--init", "zeros", "--max-sweeps", "1"]);
    assert_eq!(code(&out), 3);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["converged"], false);
    assert_eq!(report["sweeps"], 1);
}

#[test]
fn estimate_survives_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    assert_eq!(code(&mde(&["simulate", "--n", "40", "--p", "3", "--seed", "9", "--out", path(&data)])), 0);
    let first = mde(&["fit", "--data", path(&data), "--response", "y"]);
    assert_eq!(code(&first), 0);
    let report: Value = serde_json::from_str(&stdout(&first)).unwrap();
    let estimate: Vec<f64> = serde_json::from_value(report["estimate"].clone()).unwrap();
    let init = estimate.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",");
    let again = mde(&["fit", "--data", path(&data), "--response", "y", "--init", &init]);
    assert_eq!(code(&again), 0);
    let report: Value = serde_json::from_str(&stdout(&again)).unwrap();
    let restarted: Vec<f64> = serde_json::from_value(report["estimate"].clone()).unwrap();
    assert_eq!(restarted, estimate);
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--n", "100", "--p", "4", "--seed", "42"];
    let a = mde(&args);
    let b = mde(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines[0], "x1,x2,x3,x4,y");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
}

#[test]
fn simulate_accepts_negative_beta() {
    let out = mde(&["simulate", "--n", "5", "--p", "2", "--beta", "-1,-2.5"]);
    assert_eq!(code(&out), 0);
    let out = mde(&["simulate", "--n", "5", "--p", "3", "--beta", "1,2"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let out = mde(&["simulate", "--n", "5", "--p", "2", "--out", path(&target)]);
    assert_eq!(code(&out), 2);
    let out = mde(&["bench", "--n-list", "20", "--repeats", "3", "--out", path(&target)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_passes_by_default() {
    let out = mde(&["verify"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("distance vs integral: 200/200 passed"), "{text}");
    assert!(text.contains("coordinate update vs brute force: 200/200 passed"), "{text}");
}

#[test]
fn verify_refuses_large_instances() {
    assert_eq!(code(&mde(&["verify", "--max-n", "60"])), 1);
}

#[test]
fn verify_reports_injected_fault_with_replay_seed() {
    let out = mde(&["verify", "--trials", "10", "--seed", "5", "--inject-fault"]);
    assert_eq!(code(&out), 4);
    let text = stdout(&out);
    assert!(text.contains("replay with --trials 1 --seed 5 "), "{text}");
    let replay = mde(&["verify", "--trials", "1", "--seed", "5", "--inject-fault"]);
    assert_eq!(code(&replay), 4);
}

#[test]
fn bench_scaling_writes_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("bench.csv");
    let out = mde(&["bench", "--mode", "scaling", "--n-list", "20,40,80", "--repeats", "3", "--out", path(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("n,p,repeats,method"));
    let ns: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["20", "40", "80"]);
    assert!(stdout(&out).contains("coordinate"));
}

#[test]
fn bench_compare_reports_both_methods() {
    let out = mde(&["bench", "--mode", "compare", "--n-list", "20", "--repeats", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains(",coordinate,") && text.contains(",nelder_mead,"), "{text}");
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&mde(&["--help"])), 0);
    assert_eq!(code(&mde(&["fit", "--help"])), 0);
}
