use std::process::{Command, Output};

use serde_json::Value;

fn dirac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = dirac(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analyze_cawley_lists_three_first_class_constraints() {
    let v = json(&["analyze", "cawley", "--format", "structured"]);
    assert_eq!(v["schema"], "dirac-report/1");
    let rows = v["constraints"].as_array().unwrap();
    let got: Vec<(u64, &str, bool)> = rows
        .iter()
        .map(|r| (r["generation"].as_u64().unwrap(), r["class"].as_str().unwrap(), r["effective"].as_bool().unwrap()))
        .collect();
    assert_eq!(got, vec![(0, "first", true), (1, "first", false), (2, "first", false)]);
    assert_eq!(v["reduced"]["initial_conditions"], serde_json::json!(["z", "p_x"]));
}

#[test]
fn integrate_cawley_reaches_twenty() {
    let v = json(&["integrate", "cawley", "--format", "structured"]);
    let x = v["final_state"].as_array().unwrap().iter().find(|s| s["variable"] == "x").unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!((x - 20.0).abs() < 1e-6, "x = {x}");
    assert_eq!(v["final_time"].as_f64().unwrap(), 10.0);
}

#[test]
fn quantize_counterexample_a_is_stationary() {
    let v = json(&["quantize", "counterexample-a", "--format", "structured"]);
    assert!(v["energy_final"].as_f64().unwrap().abs() < 1e-10);
    let defect = v["conditions"].as_array().unwrap().iter().map(|c| c["max_residual"].as_f64().unwrap()).fold(0.0, f64::max);
    assert!(defect < 1e-10, "defect {defect}");
}

#[test]
fn trajectory_csv_has_header_and_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac(&["integrate", "cawley", "--steps", "10", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,z,p_x,p_z"));
    let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    let t = row[0];
    assert_eq!(t.split('e').next().unwrap().replace(['.', '-'], "").len(), 17, "{t}");
    assert_eq!(row[0].parse::<f64>().unwrap(), 1e-3);
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn quantize_writes_wave_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac(&["quantize", "counterexample-a", "--steps", "5", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("psi_final.csv")).unwrap();
    assert!(csv.starts_with("x,re,im\n"));
    assert_eq!(csv.lines().count(), 129);
}

#[test]
fn catalog_files_can_be_exported_and_reloaded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac(&["catalog", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let path = dir.path().join("counterexample-a.sys");
    let from_file = dirac(&["analyze", path.to_str().unwrap()]);
    let builtin = dirac(&["analyze", "counterexample-a"]);
    assert_eq!(from_file.stdout, builtin.stdout);
    let listing = String::from_utf8(dirac(&["catalog"]).stdout).unwrap();
    assert_eq!(listing.lines().count(), 4);
}

#[test]
fn parse_errors_name_module_and_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.sys");
    std::fs::write(&path, "system: broken\nvariables:\n  coordinates = x\nlagrangian:\n  L = 1/2*x_dot^2 + q\n").unwrap();
    let out = dirac(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("system_file"), "{msg}");
    assert!(msg.contains("broken.sys:5:"), "{msg}");
}

#[test]
fn pipeline_errors_name_module() {
    let out = dirac(&["quantize", "harmonic-oscillator", "--h=-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cli_reporting"), "{}", stderr(&out));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nogauge.sys");
    std::fs::write(&path, "system: a\nvariables:\n  coordinates = x, y\nlagrangian:\n  L = 1/2*exp(y)*x_dot^2\nroots:\n  1/2*exp(-y)*p_x^2 -> p_x\n")
        .unwrap();
    let out = dirac(&["integrate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("error in reduction") && msg.contains("nogauge.sys [gauge]"), "{msg}");
}

#[test]
fn unknown_system_and_bad_flags() {
    let out = dirac(&["analyze", "no-such-system"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("systems_catalog"));
    let out = dirac(&["integrate", "cawley", "--policy", "sometimes"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn total_hamiltonian_run_respects_seed() {
    let a = dirac(&["integrate", "counterexample-a", "--hamiltonian", "total", "--seed", "1", "--steps", "300"]);
    let b = dirac(&["integrate", "counterexample-a", "--hamiltonian", "total", "--seed", "2", "--steps", "300"]);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("policy seed: 1"), "{text}");
}
