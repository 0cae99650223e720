use std::process::Command;

use cli::{execute, Mode, RunConfig};

fn ppopf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ppopf"))
}

#[test]
fn centralized_mode_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { mode: Mode::Centralized, out: dir.path().to_path_buf(), ..RunConfig::default() };
    let outcome = execute(&cfg).unwrap();
    assert!(outcome.success);
    assert_eq!(outcome.files, ["config.json", "central.json", "summary.csv", "manifest.json"]);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("centralized,true,"), "{summary}");
    let back = RunConfig::load(&dir.path().join("config.json")).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn config_errors_exit_with_two_and_name_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = ppopf().args(["--mode", "plain", "--alpha=-1", "--beta", "2", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha") && err.contains("beta"), "{err}");
    assert!(!dir.path().join("config.json").exists());
}

#[test]
fn environment_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = ppopf().env("PPOPF_KEY_BITS", "64").args(["--mode", "phe", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("key_bits: 64-bit"));

    let out = ppopf().env("PPOPF_MODE", "centralized").arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let cfg = RunConfig::load(&dir.path().join("config.json")).unwrap();
    assert_eq!(cfg.mode, Mode::Centralized);
}

#[test]
fn unconverged_run_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ppopf().args(["--mode", "plain", "--max-outer", "2", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let trace = std::fs::read_to_string(dir.path().join("trace_plain.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3);
}
