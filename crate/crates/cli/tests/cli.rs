use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hycast::scenario::Scenario;
use tempfile::TempDir;

fn hycast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hycast")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Three files, one cache slot: small enough to optimise in about a second.
fn tiny(dir: &Path) -> PathBuf {
    let s = Scenario {
        n_files: 3,
        cache_capacity: 1,
        ..Scenario::reference()
    };
    write(dir, "tiny.json", &s.to_json_string())
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{ \"n_files\": ");
    let out = hycast(&["evaluate", bad.to_str().unwrap(), "--baseline", "spuc"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_scenario_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let s = Scenario {
        cache_capacity: 0,
        ..Scenario::reference()
    };
    let path = write(dir.path(), "s.json", &s.to_json_string());
    let out = hycast(&["evaluate", path.to_str().unwrap(), "--baseline", "spuc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_an_input_error() {
    let out = hycast(&["evaluate", "/nonexistent/config.json", "--baseline", "spuc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_policy_is_pure_unicast() {
    let dir = TempDir::new().unwrap();
    let config = tiny(dir.path());
    let policy = write(dir.path(), "p.json", r#"{"p": [0, 0, 0], "beta": [0, 0, 0], "u": 8}"#);
    let out = hycast(&["evaluate", config.to_str().unwrap(), "--policy", policy.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&stdout(&out));
    assert_eq!(table[0], ["w_mc_eff", "w_uc", "w_tot", "o_mc", "o_uc", "o_tot"]);
    let v: Vec<f64> = table[1].iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!(v[0], 0.0);
    assert_eq!(v[2], v[1]);
    assert_eq!(v[3], 1.0);
    assert_eq!(v[5], v[4]);
}

#[test]
fn optimized_policy_round_trips_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let config = tiny(dir.path());
    let policy = dir.path().join("opt.json");
    let opt = hycast(&["optimize", config.to_str().unwrap(), "--out", policy.to_str().unwrap()]);
    assert!(opt.status.success(), "{}", String::from_utf8_lossy(&opt.stderr));
    let eval = hycast(&["evaluate", config.to_str().unwrap(), "--policy", policy.to_str().unwrap()]);
    assert!(eval.status.success());
    assert_eq!(stdout(&opt), stdout(&eval));
}

#[test]
fn empty_range_prints_header_only() {
    let dir = TempDir::new().unwrap();
    let config = tiny(dir.path());
    let out = hycast(&["sweep", config.to_str().unwrap(), "--param", "lambda_h", "--range", "50:20:10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("lambda_h,"));
}

#[test]
fn sweep_rows_follow_the_range() {
    let dir = TempDir::new().unwrap();
    let config = tiny(dir.path());
    let out = hycast(&["sweep", config.to_str().unwrap(), "--param", "tau", "--range", "0:1:0.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 4);
    let swept: Vec<f64> = table[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(swept, [0.0, 0.5, 1.0]);
    let error_col = table[0].iter().position(|h| h == "error").unwrap();
    assert!(table[1..].iter().all(|r| r[error_col].is_empty()));
}

#[test]
fn bad_range_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let config = tiny(dir.path());
    let out = hycast(&["sweep", config.to_str().unwrap(), "--param", "gamma_th", "--logrange", "0:1:5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mc_sweep_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let config = tiny(dir.path());
    let args = [
        "sweep",
        config.to_str().unwrap(),
        "--param",
        "lambda_h",
        "--range",
        "50:100:50",
        "--baseline",
        "spuc",
        "--mode",
        "both",
        "--reps",
        "500",
        "--windows",
        "1",
        "--seed",
        "7",
    ];
    let a = hycast(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&hycast(&args)));
    assert_eq!(rows(&stdout(&a)).len(), 3);
}

#[test]
fn validate_rejects_zero_reps() {
    let dir = TempDir::new().unwrap();
    let config = tiny(dir.path());
    let out = hycast(&["validate", config.to_str().unwrap(), "--reps", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_report_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let config = tiny(dir.path());
    let args = ["validate", config.to_str().unwrap(), "--suite", "lemma1", "--reps", "20000", "--seed", "3"];
    let a = hycast(&args);
    let b = hycast(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(stdout(&a).lines().count(), 3);
}
