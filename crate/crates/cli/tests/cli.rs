use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn deep_mpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deep-mpc")).args(args).output().expect("binary runs")
}

fn run_into(dir: &Path) -> Vec<u8> {
    let out = deep_mpc(&["run", "--seed", "7", "--steps", "150", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["trajectory.csv", "log.json", "plot.dat", "config.toml"] {
        assert!(dir.join(file).exists(), "missing {file}");
    }
    fs::read(dir.join("trajectory.csv")).unwrap()
}

#[test]
fn run_is_reproducible_across_invocations() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run_into(a.path()), run_into(b.path()));
}

#[test]
fn check_reads_a_saved_log() {
    let dir = tempfile::tempdir().unwrap();
    run_into(dir.path());
    let log = dir.path().join("log.json");
    let out = deep_mpc(&["check", "--log", log.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stdout.is_empty());
}

#[test]
fn infeasible_governor_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, "[governor]\nhorizon = 20\n").unwrap();
    let out = deep_mpc(&["governor", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn governor_prints_reference_csv() {
    let out = deep_mpc(&["governor"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 62);
}

#[test]
fn selftest_passes() {
    let out = deep_mpc(&["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[mpc]\nhorizn = 20\n").unwrap();
    assert_eq!(deep_mpc(&["governor", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
