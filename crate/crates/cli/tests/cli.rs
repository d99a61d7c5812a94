use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn shac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn config(algorithm: &str, objective: &str, out: &Path) -> String {
    format!(
        "algorithm = \"{algorithm}\"\nobjective = \"{objective}\"\nbudget = 40\nworkers = 10\nseeds = [0, 1]\noutput_dir = {:?}\n",
        out.to_str().unwrap()
    )
}

fn run_ok(cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = shac(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn run_writes_all_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("shac");
    let cfg = write_config(tmp.path(), "shac.toml", &config("shac", "branin", &out));
    run_ok(&cfg, &[]);

    for f in ["config.toml", "aggregate.json", "trials_0.jsonl", "trials_1.jsonl", "summary_0.json", "summary_1.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let trials = fs::read_to_string(out.join("trials_0.jsonl")).unwrap();
    assert_eq!(trials.lines().filter(|l| l.contains("\"trial\"")).count(), 40);
    assert!(trials.lines().any(|l| l.contains("\"event\":\"adopt\"")));

    let agg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("aggregate.json")).unwrap()).unwrap();
    assert_eq!(agg["algorithm"], "shac");
    assert_eq!(agg["best"]["n"], 2);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary_0.json")).unwrap()).unwrap();
    assert_eq!(summary["per_batch_median"].as_array().unwrap().len(), 4);
}

#[test]
fn same_config_gives_identical_logs() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let cfg = write_config(tmp.path(), "c.toml", &config("shac", "hartmann6", &a));
    run_ok(&cfg, &[]);
    run_ok(&cfg, &["--output-dir", b.to_str().unwrap()]);
    for seed in 0..2 {
        let f = format!("trials_{seed}.jsonl");
        assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap());
    }
}

#[test]
fn seed_override_replaces_seed_list() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("rs");
    let cfg = write_config(tmp.path(), "rs.toml", &config("rs", "branin", &out));
    run_ok(&cfg, &["--seed-override", "7,9"]);
    assert!(out.join("trials_7.jsonl").exists());
    assert!(out.join("trials_9.jsonl").exists());
    assert!(!out.join("trials_0.jsonl").exists());
}

#[test]
fn rs2x_spends_twice_the_budget() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("rs2x");
    let cfg = write_config(tmp.path(), "rs2x.toml", &config("rs2x", "branin", &out));
    run_ok(&cfg, &[]);
    let trials = fs::read_to_string(out.join("trials_0.jsonl")).unwrap();
    assert_eq!(trials.lines().count(), 80);
}

#[test]
fn bad_configs_exit_nonzero() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("x");
    let indivisible = config("rs", "branin", &out).replace("workers = 10", "workers = 7");
    let cfg = write_config(tmp.path(), "bad.toml", &indivisible);
    let res = shac(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("divide"));
    assert!(!out.exists(), "nothing is written for an invalid config");

    let res = shac(&["run", "--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert!(!res.status.success());
}

#[test]
fn compare_prints_one_row_per_run() {
    let tmp = TempDir::new().unwrap();
    let s = tmp.path().join("s");
    let r = tmp.path().join("r");
    run_ok(&write_config(tmp.path(), "s.toml", &config("shac", "branin", &s)), &[]);
    run_ok(&write_config(tmp.path(), "r.toml", &config("rs2x", "branin", &r)), &[]);

    let one = shac(&["compare", s.to_str().unwrap()]);
    assert!(one.status.success());
    let text = String::from_utf8(one.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);

    let two = shac(&["compare", s.to_str().unwrap(), r.to_str().unwrap()]);
    assert!(two.status.success());
    let text = String::from_utf8(two.stdout).unwrap();
    assert!(text.contains("shac") && text.contains("rs2x"));
}

#[test]
fn compare_rejects_mismatched_objectives_and_empty_input() {
    let tmp = TempDir::new().unwrap();
    let b = tmp.path().join("b");
    let h = tmp.path().join("h");
    run_ok(&write_config(tmp.path(), "b.toml", &config("rs", "branin", &b)), &[]);
    run_ok(&write_config(tmp.path(), "h.toml", &config("rs", "hartmann6", &h)), &[]);
    let res = shac(&["compare", b.to_str().unwrap(), h.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("hartmann6"));

    let empty = shac(&["compare"]);
    assert_eq!(empty.status.code(), Some(2));
}

#[test]
fn analyze_writes_median_csv_and_refuses_hamming_on_continuous() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("rs");
    run_ok(&write_config(tmp.path(), "rs.toml", &config("rs", "branin", &out)), &[]);

    let res = shac(&["analyze", out.to_str().unwrap(), "--medians"]);
    assert!(res.status.success());
    let csv = fs::read_to_string(out.join("medians_0.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "batch_index,median");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,"));

    let res = shac(&["analyze", out.to_str().unwrap(), "--hamming"]);
    assert!(!res.status.success());
    assert!(!out.join("hamming_0.csv").exists());

    let neither = shac(&["analyze", out.to_str().unwrap()]);
    assert_eq!(neither.status.code(), Some(2));
}
