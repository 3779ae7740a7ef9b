use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dqi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqi"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = dqi(dir.path(), &["gen", "--p", "101", "--seed", "1", "--out", name]);
        assert!(out.status.success());
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let v: Value = serde_json::from_slice(&a).unwrap();
    let sets = v["sets"].as_array().unwrap();
    assert_eq!(sets.len(), 100);
    assert!(sets.iter().all(|s| s.as_array().unwrap().len() == 50));
    assert_eq!(v["n"], 11);
}

#[test]
fn gen_rejects_composite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqi(dir.path(), &["gen", "--p", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a prime"));
}

fn small_instance(dir: &Path) {
    let out = dqi(dir, &["gen", "--p", "11", "--profile", "custom", "--n", "3", "--r", "5", "--seed", "3", "--out", "inst.json"]);
    assert!(out.status.success());
}

#[test]
fn simulate_matches_formula_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    small_instance(dir.path());
    for _ in 0..2 {
        let out = dqi(dir.path(), &["simulate", "--instance", "inst.json", "--shots", "500", "--seed", "9", "--out", "sim.json"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = fs::read(dir.path().join("sim.json")).unwrap();
    let samples = fs::read_to_string(dir.path().join("sim.samples.csv")).unwrap();
    let out = dqi(dir.path(), &["simulate", "--instance", "inst.json", "--shots", "500", "--seed", "9", "--out", "sim.json"]);
    assert!(out.status.success());
    assert_eq!(first, fs::read(dir.path().join("sim.json")).unwrap());

    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["command"], "simulate");
    assert!(v["abs_difference"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["ell"], 1);
    assert_eq!(v["weight_kind"], "optimal");
    assert!(samples.starts_with("# dqi schema_version=1 config="));
    assert_eq!(data_lines(&samples).len(), 501);
}

#[test]
fn simulate_without_shots_writes_no_samples() {
    let dir = tempfile::tempdir().unwrap();
    small_instance(dir.path());
    let out = dqi(dir.path(), &["simulate", "--instance", "inst.json", "--shots", "0", "--out", "sim.json"]);
    assert!(out.status.success());
    assert!(!dir.path().join("sim.samples.csv").exists());
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("sim.json")).unwrap()).unwrap();
    assert!(v["sample_mean"].is_null());
}

#[test]
fn budget_and_io_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    small_instance(dir.path());
    let out = dqi(dir.path(), &["simulate", "--instance", "inst.json", "--budget-amps", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dense amplitudes"));
    let out = dqi(dir.path(), &["simulate", "--instance", "inst.json", "--budget-errors", "50"]);
    assert_eq!(out.status.code(), Some(3));
    let out = dqi(dir.path(), &["simulate", "--instance", "missing.json"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn baseline_rows_beat_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqi(dir.path(), &["gen", "--p", "101", "--seed", "2", "--out", "inst.json"]);
    assert!(out.status.success());
    let out = dqi(dir.path(), &["baseline", "--instance", "inst.json", "--trials", "200", "--out", "b.csv"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows[0], "trial,objective");
    assert_eq!(rows.len(), 201);
    let vals: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(vals.iter().all(|&v| v >= 11.0));
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    assert!((mean / 100.0 - 0.55).abs() < 0.05);

    let out = dqi(dir.path(), &["baseline", "--instance", "inst.json", "--trials", "1", "--out", "one.csv"]);
    assert!(out.status.success());
    assert_eq!(data_lines(&fs::read_to_string(dir.path().join("one.csv")).unwrap()).len(), 2);
}

#[test]
fn decode_bench_single_prime() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqi(dir.path(), &["decode-bench", "--primes", "257", "--trials", "2", "--out", "d.csv"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("257,26,13,2,0,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"fast_exponent\":null"));
}

#[test]
fn analyze_rows_and_weight_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqi(dir.path(), &["analyze", "--lambdas", "0.05", "--rhos", "0.5", "--out", "a.csv", "--weights-out", "w.csv"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(data_lines(&text)[1].contains("0.717944947177"));
    let dump = fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let rows = data_lines(&dump);
    assert_eq!(rows.len(), 502);
    for col in 1..4 {
        let s: f64 = rows[1..].iter().map(|r| r.split(',').nth(col).unwrap().parse::<f64>().unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-9, "column {col}: {s}");
    }

    let out = dqi(dir.path(), &["analyze", "--lambdas", "", "--out", "e.csv"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert_eq!(data_lines(&text), vec!["lambda,rho,m,ell,asymptotic,eigen_upper,binom_lower,binom_actual"]);
}

#[test]
fn verify_reports_and_detects_faults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqi(dir.path(), &["verify", "--level", "fast", "--out", "v.json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["id"].is_string() && c["description"].is_string()));

    let out = dqi(dir.path(), &["verify", "--inject-fault", "decoder", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["fault"], "decoder");
}
