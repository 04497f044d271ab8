use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use causal_lab_cli::Report;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_causal-lab"));
    cmd.env_remove("CAUSAL_LAB_WORKERS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn causal-lab")
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn config_without_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"name":"noseed","model":{"id":"minkowski2d"},"pipeline":[]}"#,
    );
    let out = run(&["report", "--config", s(&config), "--out-dir", s(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed"), "{err}");
    assert!(!dir.path().join("r/report.json").exists());
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"name":"x","seed":1,"model":{"id":"minkowski2d"},"colour":"red","pipeline":[]}"#,
    );
    let out = run(&["report", "--config", s(&config), "--out-dir", s(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["sample", "--mode", "grid"]).status.code(), Some(64));
    assert_eq!(run(&["no-such-verb"]).status.code(), Some(64));
}

#[test]
fn passing_report_exits_zero_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let config = config_path("frame_formulas");
    assert_eq!(run(&["report", "--config", s(&config), "--out-dir", s(&a)]).status.code(), Some(0));
    let out = bin()
        .env("CAUSAL_LAB_WORKERS", "1")
        .args(["report", "--config", s(&config), "--out-dir", s(&b)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let ra = Report::load(&a.join("report.json")).unwrap();
    let rb = Report::load(&b.join("report.json")).unwrap();
    assert_eq!(ra.digest, rb.digest);
    assert_eq!(ra.digest, ra.compute_digest());
}

#[test]
fn failing_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "name": "too-strict",
            "seed": 3,
            "model": {"id": "minkowski2d"},
            "sampling": {"mode": "grid", "step": 0.1, "window": {"lo": [-0.2, -0.6], "hi": [1.2, 0.6]}},
            "pipeline": [
                {"op": "sample"},
                {"op": "distance", "from": [0, 0], "to": [1, 0], "expect": {"min": 5.0, "max": 6.0}}
            ]
        }"#,
    );
    let out = run(&["report", "--config", s(&config), "--out-dir", s(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn op_without_input_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"name":"orphan","seed":1,"model":{"id":"minkowski2d"},"pipeline":[{"op":"timefn"}]}"#,
    );
    let out = run(&["report", "--config", s(&config), "--out-dir", s(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn emit_plot_writes_documented_headers() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r");
    let config = config_path("singular_divergence");
    assert_eq!(run(&["report", "--config", s(&config), "--out-dir", s(&r)]).status.code(), Some(0));
    let report = Report::load(&r.join("report.json")).unwrap();
    let check = report.checks.iter().find(|c| c.plot.is_some()).expect("a check with plot data");
    let csv = dir.path().join("growth.csv");
    let out = run(&["emit-plot", "--report", s(&r.join("report.json")), "--check", &check.name, "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("epsilon,distance,log_inv_eps"));
    assert!(text.lines().count() > 2);

    let out = run(&["emit-plot", "--report", s(&r.join("report.json")), "--check", "missing", "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_surface_timefn_verify_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let graph = d.join("g.json");
    let out = run(&[
        "sample", "--model", "minkowski2d", "--mode", "grid", "--step", "0.1", "--window", "-1,-1,1,1", "--out",
        s(&graph),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["distance", "--graph", s(&graph), "--from", "0", "--to", "420"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // node 420 sits straight above node 0 at time distance 2
    assert!((v["distance"].as_f64().unwrap() - 2.0).abs() < 1e-9, "{v}");

    let seed = d.join("seed.json");
    std::fs::write(&seed, r#"{"nodes":[220]}"#).unwrap();
    let surface = d.join("surface.json");
    let out = run(&["surface", "--graph", s(&graph), "--seed-set", s(&seed), "--future-of", "--out", s(&surface)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let field = d.join("f.json");
    let out = run(&["timefn", "--graph", s(&graph), "--surface", s(&surface), "--out", s(&field)]);
    assert_eq!(out.status.code(), Some(0));

    let report = d.join("verify.json");
    let out = run(&[
        "verify", "--graph", s(&graph), "--field", s(&field), "--checks", "flip,increasing", "--out", s(&report),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = Report::load(&report).unwrap();
    assert_eq!(report.checks.len(), 2);
}

#[test]
fn unseeded_surface_rejects_non_future_set() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let graph = d.join("g.json");
    run(&["sample", "--model", "minkowski2d", "--mode", "grid", "--step", "0.2", "--window", "-1,-1,1,1", "--out", s(&graph)]);
    let seed = d.join("seed.json");
    std::fs::write(&seed, r#"{"nodes":[60]}"#).unwrap();
    let out = run(&["surface", "--graph", s(&graph), "--seed-set", s(&seed), "--out", s(&d.join("s.json"))]);
    assert_eq!(out.status.code(), Some(1));
}
