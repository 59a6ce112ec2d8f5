use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multiseq"))
}

fn write(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("multiseq-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

const TRIVIAL: &str = r#"{"model": {"kind": "bernoulli"}, "thetas": [0.3, 0.7], "evals": [0.3, 0.7],
  "gammas": [0.5, 0.5], "lambdas": [[0, 0.5], [0.9, 0]], "horizon": 20}"#;

const SMALL: &str = r#"{"model": {"kind": "bernoulli"}, "thetas": [0.3, 0.7], "evals": [0.3, 0.7],
  "gammas": [0.5, 0.5], "lambdas": [[0, 20], [20, 0]], "horizon": 40}"#;

#[test]
fn trivial_spec_is_a_configuration_error() {
    let cfg = write("trivial.json", TRIVIAL);
    let out = bin().arg("--config").arg(&cfg).arg("validate").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-triviality"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().arg("evaluate").arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_json_round_trips() {
    let cfg = write("small.json", SMALL);
    let out = bin().args(["--format", "json", "--config"]).arg(&cfg).arg("evaluate").output().unwrap();
    assert!(out.status.success());
    let report = multiseq::TestReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.alpha.len(), 2);
    for i in 0..2 {
        assert!((report.alpha_i[i] - (1.0 - report.alpha[i][i])).abs() < 1e-12);
    }
}

#[test]
fn scenario_list_names_every_study() {
    let out = bin().args(["scenario", "list"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["table1", "table2", "table3", "example2_f4", "example4_trend", "example5_kw"] {
        assert!(text.contains(id), "{id} missing");
    }
}
