use std::path::PathBuf;
use std::process::{Command, Output};

fn voxform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voxform")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("voxform-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn sewing_report_has_schema_and_passes() {
    let out = voxform(&["sewing"]);
    assert_eq!(out.status.code(), Some(0));
    let json = report(&out);
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["command"], "sewing");
    let checks = json["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn corrupted_bracket_fails_axioms() {
    let out = voxform(&["axioms", "--suite", "axioms", "--inject-fault", "axioms.bracket"]);
    assert_eq!(out.status.code(), Some(1));
    let json = report(&out);
    assert!(json["checks"].as_array().unwrap().iter().any(|c| c["status"] == "fail"));
}

#[test]
fn flipped_leibniz_sign_fails() {
    let out = voxform(&["complex", "--suite", "leibniz", "--inject-fault", "complex.leibniz_sign"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_fault_and_suite_are_usage_errors() {
    assert_eq!(voxform(&["sewing", "--inject-fault", "nope"]).status.code(), Some(2));
    let out = voxform(&["sewing", "--suite", "leibniz"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("leibniz"));
}

#[test]
fn empty_suite_list_runs_nothing() {
    let out = voxform(&["complex", "--suite", ""]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["checks"].as_array().unwrap().is_empty());
}

#[test]
fn bad_config_is_rejected() {
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "[sewing]\nepsilon = 4\n").unwrap();
    let out = voxform(&["sewing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&cfg, "[voa]\nflavour = 3\n").unwrap();
    let out = voxform(&["sewing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn product_csv_rows() {
    let dir = scratch("csv");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "[voa]\nlevel = 6\n[sewing]\nepsilon = 1/16, 1/8+1/8 i\n").unwrap();
    let csv = dir.join("levels.csv");
    let out = voxform(&["product", "--config", cfg.to_str().unwrap(), "--suite", "sweep", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epsilon,level,abs_coefficient,tail_bound");
    assert_eq!(lines.len(), 1 + 2 * 7);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 4));
    let _ = std::fs::remove_dir_all(&dir);
}
