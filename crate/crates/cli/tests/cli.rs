//! The `autotelic` binary end to end: outputs and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn autotelic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autotelic")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_eval_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    for seed in ["0", "1"] {
        let o = autotelic(&["run", "--config", "base", "--seed", seed, "--steps", "1200", "--out", path(&runs)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("1200 steps"));
    }
    let dir = runs.join("base/seed-1");
    for f in ["manifest.toml", "metrics.jsonl", "checkpoint.json", "timing.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let manifest = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("overrides = [\"total_steps\"]"));

    let o = autotelic(&["eval", "--checkpoint", path(&dir.join("checkpoint.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("score (all)") && out.contains("a substance called water"));

    let o = autotelic(&["report", "--runs", path(&runs)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("base"));
    assert!(runs.join("summary.csv").is_file());
    assert!(runs.join("curves/base-eval_all.svg").is_file());

    // A corrupt line makes the report partial.
    let log = dir.join("metrics.jsonl");
    let mut text = std::fs::read_to_string(&log).unwrap();
    text.push_str("garbage\n");
    std::fs::write(&log, text).unwrap();
    let o = autotelic(&["report", "--runs", path(&runs), "--out", path(&tmp.path().join("rep"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt"));
}

#[test]
fn report_on_an_empty_directory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = autotelic(&["report", "--runs", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn unknown_preset_lists_the_valid_names() {
    let tmp = tempfile::tempdir().unwrap();
    let o = autotelic(&["run", "--config", "nope", "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("metacognitive") && err.contains("extrinsic-impossible"), "{err}");
}

#[test]
fn baseline_writes_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = autotelic(&["baseline", "--steps", "600", "--seeds", "0,1", "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("baseline.csv")).unwrap();
    assert!(csv.starts_with("goal,hard,seed-0,seed-1,mean\n"));
    assert_eq!(stdout(&o), csv);
}

#[test]
fn config_file_runs_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("short.toml");
    std::fs::write(&cfg, "preset = \"go-explore\"\ntotal_steps = 800\neval_period = 400\n").unwrap();
    let o = autotelic(&["run", "--config", path(&cfg), "--seed", "2", "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = std::fs::read_to_string(tmp.path().join("go-explore/seed-2/metrics.jsonl")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
}
