use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use heisenfft::config::{ExperimentConfig, Scenario};
use heisenfft::report::Report;

fn heisenfft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heisenfft")).args(args).output().unwrap()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> String {
    let path = dir.join("config.json");
    fs::write(&path, cfg.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn dump_defaults_emits_valid_config() {
    let out = heisenfft(&["dump-defaults", "reduction-chain"]);
    assert!(out.status.success());
    let cfg = ExperimentConfig::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.scenario, Scenario::ReductionChain);
    assert!(!heisenfft(&["dump-defaults", "nonsense"]).status.success());
}

#[test]
fn validate_reports_through_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults(Scenario::Observability);
    let path = write_config(dir.path(), &cfg);
    let ok = heisenfft(&["validate", &path]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(ok.stdout.is_empty());
    cfg.grid.points = 25;
    let path = write_config(dir.path(), &cfg);
    let bad = heisenfft(&["validate", &path]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("grid.points"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults(Scenario::PropagatorSelftest);
    cfg.grid.points = 31;
    let path = write_config(dir.path(), &cfg);
    let out = heisenfft(&["run", &path, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.points"));
    assert!(!dir.path().join("o").exists());
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"schema\": 3").unwrap();
    assert_eq!(heisenfft(&["run", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(heisenfft(&["run", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn run_writes_report_tables_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults(Scenario::Observability);
    cfg.dump_fields = true;
    let path = write_config(dir.path(), &cfg);
    let out_dir = dir.path().join("out");
    let out = heisenfft(&["run", &path, "--out", out_dir.to_str().unwrap(), "--seed", "17"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.seed, 17);
    assert!(report.passed && report.checks.len() >= 3);
    assert_eq!(report.artifacts, vec!["initial.hsnf".to_string(), "observability.csv".to_string()]);
    let csv = fs::read_to_string(out_dir.join("observability.csv")).unwrap();
    assert!(csv.starts_with("s1,s2,lhs,rhs_outside_s,rhs_outside_sigma,constant\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(out_dir.join("timing.json").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn failing_assertion_exits_1_with_its_id() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults(Scenario::Observability);
    // An impossible tolerance makes one invariant fail while the run itself succeeds.
    cfg.observability.as_mut().unwrap().tolerances.empty = -1.0;
    let path = write_config(dir.path(), &cfg);
    let out = heisenfft(&["run", &path, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty_sets_one_half"));
    let report: Report = serde_json::from_str(&fs::read_to_string(dir.path().join("o/report.json")).unwrap()).unwrap();
    assert!(!report.passed);
    assert!(!report.find("empty_sets_one_half").unwrap().passed);
}
