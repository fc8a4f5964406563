use std::path::Path;
use std::process::{Command, Output};

fn gbsdock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbsdock"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let cfg = serde_json::json!({
        "solver_samples": 200,
        "pilot_samples": 200,
        "random_search_samples": 2000,
        "max_steps": 4,
    });
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

#[test]
fn oracle_recovers_planted_clique() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(gbsdock(&["--out-dir", out, "gen-instance"]).status.success());
    let inst: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("instance.json")).unwrap()).unwrap();
    let graph = dir.path().join("graph.json");
    let o = gbsdock(&["oracle", "--graph", graph.to_str().unwrap()]);
    assert!(o.status.success());
    let best: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(best["clique"], inst["planted_clique"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"eta": 1.5}"#).unwrap();
    assert_eq!(gbsdock(&["--config", bad.to_str().unwrap(), "tune"]).status.code(), Some(2));
    std::fs::write(&bad, r#"{"target_clicks": 23.9}"#).unwrap();
    assert_eq!(gbsdock(&["--config", bad.to_str().unwrap(), "tune"]).status.code(), Some(3));
    assert_eq!(gbsdock(&["bench", "fig7"]).status.code(), Some(2));
}

#[test]
fn tune_reports_target() {
    let o = gbsdock(&["tune"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["mean_clicks"].as_f64().unwrap() - 8.0).abs() <= 1e-3);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 24);
}

#[test]
fn sample_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = gbsdock(&["--out-dir", out, "--samples", "50", "sample", "--source", "postselected"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",8")));
    let o = gbsdock(&["--out-dir", out, "solve", "--method", "random"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("samples.solve.json").exists());
}

#[test]
fn bench_is_reproducible_and_emits_gnuplot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = gbsdock(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
            "bench",
            "fig56",
            "--emit-gnuplot",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "fig56.csv"), read(&b, "fig56.csv"));
    assert!(read(&a, "fig56.gp").starts_with(b"set datafile separator"));
    let summary: serde_json::Value = serde_json::from_slice(&read(&a, "fig56.json")).unwrap();
    assert_eq!(summary["seed"], 1);
    assert_eq!(summary["config"]["solver_samples"], 200);
}

#[test]
fn rerun_from_summary_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let a = dir.path().join("a");
    let o = gbsdock(&["--config", cfg.to_str().unwrap(), "--out-dir", a.to_str().unwrap(), "bench", "fig4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = dir.path().join("b");
    let sidecar = a.join("fig4.json");
    let o = gbsdock(&["--config", sidecar.to_str().unwrap(), "--out-dir", b.to_str().unwrap(), "bench", "fig4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(a.join("fig4.csv")).unwrap(), std::fs::read(b.join("fig4.csv")).unwrap());
}
