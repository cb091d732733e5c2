//! Exit codes and outputs of the `wavemap` binary.

use std::path::Path;
use std::process::{Command, Output};

use wavemap_cli::ExperimentReport;

fn wavemap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavemap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("WAVEMAP_OUT")
        .output()
        .unwrap()
}

fn report(out: &Path, command: &str) -> ExperimentReport {
    let text = std::fs::read_to_string(out.join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn passing_run_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemap(&["s-table", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "s-table");
    assert!(r.all_passed() && r.verdicts_consistent());
    assert_eq!(r.provenance.config_hash.len(), 64);
    let csv = std::fs::read_to_string(dir.path().join("s-table_table.csv")).unwrap();
    assert!(csv.starts_with("lambda,"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
}

#[test]
fn failing_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavemap(&["s-table", "2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let r = report(dir.path(), "s-table");
    assert!(!r.all_passed());
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[map]\nlambda = 2.0\nspeed = 0.5\n").unwrap();
    let o = wavemap(&["--config", bad.to_str().unwrap(), "s-table"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));

    let o = wavemap(&["--config", dir.path().join("missing.toml").to_str().unwrap(), "s-table"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = wavemap(&["--refine", "0", "s-table"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = wavemap(&["s-table", "--", "-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "name = \"unit\"\n[s_table]\nlambdas = [1.0]\n").unwrap();
    let o = wavemap(&["--config", cfg.to_str().unwrap(), "s-table"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "s-table");
    assert_eq!(r.config.name, "unit");
}
