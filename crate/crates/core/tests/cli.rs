//! End-to-end tests of the `softarm` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use softarm::impedance::ImpedanceProfile;

fn softarm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softarm")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

#[test]
fn simulate_writes_csv_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = softarm(&["simulate", "--duration", "3", "--out-dir", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let printed = stdout_json(&out);
    assert_eq!(printed["controller"], "ABSM");

    let csv = std::fs::read_to_string(dir.path().join("default.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 38);
    assert_eq!(header[0], "t");
    assert_eq!(lines.clone().count(), 3001);
    for line in lines {
        assert_eq!(line.split(',').count(), 38);
    }

    let metrics: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("default_metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics, printed);
    assert!(metrics["iae"].as_f64().unwrap() > 0.0);
}

#[test]
fn scenario_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pd.json");
    std::fs::write(
        &cfg,
        r#"{"id": "pd_run", "controller": "pd", "duration": 0.5, "force_schedule": []}"#,
    )
    .unwrap();
    let out = softarm(&["simulate", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["controller"], "PD");
    assert!(Path::new(&dir.path().join("pd_run.csv")).exists());
}

#[test]
fn malformed_config_exits_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    for text in [
        "{ not json",
        r#"{"dt": -1.0}"#,
        r#"{"unknown_field": 1}"#,
        r#"{"estimator_gain": 5000.0}"#,
    ] {
        std::fs::write(&cfg, text).unwrap();
        let out = softarm(&["simulate", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "input {text}");
        let err = stderr_json(&out);
        assert_eq!(err["error"], "config");
        assert!(err["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let out = softarm(&["simulate", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_impedance_certifies_the_default_profile() {
    let out = softarm(&["check-impedance"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
    let alpha = report["alpha"].as_f64().unwrap();
    assert!(alpha > 0.0 && alpha.is_finite());
    assert!(report["b_margin"].as_f64().unwrap().abs() <= 1e-12);
    assert!(report["q_margin"].as_f64().unwrap() <= 0.0);
    assert!(report["mu_min"].as_f64().unwrap() > 0.0);
}

#[test]
fn check_impedance_rejects_an_infeasible_rate_constant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.json");
    let profile = ImpedanceProfile::variable().with_alpha(10.0);
    std::fs::write(&path, serde_json::to_string(&profile).unwrap()).unwrap();
    let out = softarm(&["check-impedance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["pass"], false);
    assert_eq!(stderr_json(&out)["error"], "certification");
}

#[test]
fn compare_ranks_the_controllers() {
    let dir = tempfile::tempdir().unwrap();
    let out = softarm(&["compare", "--duration", "5.5", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("comparison.json")).unwrap()).unwrap();
    let results = summary["results"].as_array().unwrap();
    let iae = |name: &str| {
        results.iter().find(|r| r["controller"] == name).unwrap()["iae"].as_f64().unwrap()
    };
    assert!(iae("ABSM") < iae("SM"));
    assert!(iae("SM") < iae("PD"));
}

#[test]
fn estimate_demo_improves_with_gain() {
    let out = softarm(&["estimate-demo"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = stdout_json(&out);
    let errs: Vec<f64> = runs
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["mean_relative_tracking_error"].as_f64().unwrap())
        .collect();
    assert_eq!(errs.len(), 3);
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn estimate_demo_rejects_unstable_discretization() {
    let out = softarm(&["estimate-demo", "--ki", "5000"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "config");
}
