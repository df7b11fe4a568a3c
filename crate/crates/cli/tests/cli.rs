use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn restart_ar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_restart-ar"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(restart_ar(&["--help"]).status.code(), Some(0));
    assert_eq!(restart_ar(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_are_config_errors() {
    assert_eq!(restart_ar(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        restart_ar(&["validate", "--seed", "x"]).status.code(),
        Some(1)
    );
}

#[test]
fn missing_seed_is_reported() {
    let o = restart_ar(&["validate", "--scenario", "example-1.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed required"));
}

#[test]
fn config_errors_are_collected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "model": {
                "dim": 1, "a": 0.5,
                "alpha": {"kind": "two-point-shifted", "values": [1.25, 0.75], "probs": [0.5, 0.4], "shift": 0.5},
                "beta": {"kind": "inv-sqrt-m"}, "gamma": {"kind": "inv-sqrt-m"},
                "noise": {"kind": "uniform-interval", "lo": -1.0, "hi": 1.0},
                "region": {"kind": "interval", "lo": -0.5, "hi": 0.5}
            },
            "run": {"m": 0}
        }"#,
    );
    let o = restart_ar(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("seed required"), "{err}");
    assert!(err.contains("probabilities must sum to 1"), "{err}");
    assert!(err.contains("m must be at least 1"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"seed": 1, "sed": 2}"#);
    let o = restart_ar(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown field"));
}

#[test]
fn minimal_config_is_echoed_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"seed": 42, "scenario": "example-1.1"}"#);
    let o = restart_ar(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["seed"], 42);
    assert_eq!(
        report["config"]["run"]["m_grid"],
        serde_json::json!([10000])
    );
    assert_eq!(report["config"]["run"]["samples"], 100000);
    assert!(report["versions"]["restart-ar-core"].is_string());
}

#[test]
fn infeasible_limit_law_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"seed": 1, "limit": {"a": 1.0, "sigma": [[1.0]], "mu": [1.0], "p": 0.5}}"#,
    );
    let out = dir.path().join("out");
    let o = restart_ar(&[
        "limit-pdf",
        "--config",
        &cfg,
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("3.544908") && err.contains("exceeds 1"),
        "{err}"
    );
    assert_eq!(fs::read_dir(&out).unwrap().count(), 0);
}

#[test]
fn failed_search_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = restart_ar(&[
        "gamma-search",
        "--seed",
        "1",
        "--m",
        "100",
        "--samples",
        "2000",
        "--targets",
        "5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 0);
}

#[test]
fn limit_tables_are_rfc4180_with_lf() {
    let dir = tempfile::tempdir().unwrap();
    let o = restart_ar(&[
        "limit-cf",
        "--seed",
        "1",
        "--scenario",
        "example-1.2",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("limit-cf.csv")).unwrap();
    assert!(text.starts_with("u_1,real,imag\n"));
    assert!(!text.contains('\r'));
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let first = rows.records().next().unwrap().unwrap();
    assert_eq!(&first[0], "-10");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("limit-cf.json")).unwrap())
            .unwrap();
    assert_eq!(json["command"], "limit-cf");
}

#[test]
fn direction_flag_accepts_negative_components() {
    let o = restart_ar(&[
        "project",
        "--seed",
        "1",
        "--scenario",
        "example-1.2",
        "--direction",
        "-1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["result"]["direction"], serde_json::json!([-1.0]));
    assert_eq!(report["result"]["projection"]["prob_plus"], 0.0);
}

#[test]
fn wrong_direction_length_is_a_runtime_error() {
    let o = restart_ar(&[
        "limit-cf",
        "--seed",
        "1",
        "--scenario",
        "example-1.1",
        "--direction",
        "1,0",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scenario_runs_are_repeatable() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let o = restart_ar(&[
            "scenario",
            "example-1.1",
            "--seed",
            "42",
            "--m",
            "400",
            "--samples",
            "4000",
            "--output",
            dir.path().to_str().unwrap(),
        ]);
        assert!(matches!(o.status.code(), Some(0 | 3)));
        (
            fs::read(dir.path().join("example-1.1.json")).unwrap(),
            fs::read(dir.path().join("example-1.1.csv")).unwrap(),
        )
    };
    assert_eq!(run(), run());
}

#[test]
fn verify_reports_outcome_through_exit_code() {
    let o = restart_ar(&["verify", "10", "11", "--seed", "7", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stderr(&o)
            .lines()
            .filter(|l| l.starts_with("criterion"))
            .count(),
        2
    );
    let o = restart_ar(&["verify", "99", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn non_hitting_stays_outside_the_interval() {
    let o = restart_ar(&[
        "non-hitting",
        "--seed",
        "3",
        "--alpha",
        "0.3",
        "--gamma",
        "0.5",
        "--steps",
        "100000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["result"]["hit"], false);
    let o = restart_ar(&["non-hitting", "--seed", "3", "--alpha", "0.7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_threads_is_rejected() {
    assert_eq!(
        restart_ar(&["validate", "--seed", "1", "--threads", "0"])
            .status
            .code(),
        Some(1)
    );
}
