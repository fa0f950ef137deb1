use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dualprox(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualprox"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

#[test]
fn market_sync_run_recovers_optimum_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualprox(&["run", "--scenario", "market", "--mode", "sync", "--json", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let x: Vec<f64> = v["x_hat"].as_array().unwrap().iter().map(|r| r[0].as_f64().unwrap()).collect();
    for (a, b) in x.iter().zip([0.0, 150.0, 48.5, 50.2, 51.3]) {
        assert!((a - b).abs() <= 0.1, "{x:?}");
    }
    assert!(dir.path().join("out/trace.csv").exists());
    assert!(dir.path().join("out/trace.meta.json").exists());

    let o = dualprox(&["verify", "out/trace.csv", "--json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let r = stdout_json(&o);
    assert!(r["sync_rate"]["min_slack"].as_f64().unwrap() >= -1e-9);
    assert!(r["violations"].as_array().unwrap().is_empty());
    assert!(dir.path().join("out/trace.report.json").exists());
}

#[test]
fn market_async_runs_converge_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    for d in ["5", "10"] {
        let name = format!("d{d}");
        let o = dualprox(
            &["run", "--scenario", "market", "--mode", "async", "--delay", d, "--schedule", "worst", "--json", "--name", &name],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v = stdout_json(&o);
        assert_eq!(v["stop_reason"], "tolerance");
        assert!((v["x_hat"][1][0].as_f64().unwrap() - 150.0).abs() < 0.1);
        let o = dualprox(&["verify", &format!("{name}.csv"), "--json"], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
        let r = stdout_json(&o);
        assert!(r["delayed_rate"]["min_slack"].as_f64().unwrap() >= -1e-9);
        assert!(r["window_sum"]["min_slack"].as_f64().unwrap() >= -1e-9);
        assert!(r["weighted_window_sum"]["min_slack"].as_f64().unwrap() >= -1e-9);
    }
}

#[test]
fn missing_instance_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualprox(&["run", "--instance", "missing.json"], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("missing.json") && err.contains("No such file"), "{err}");
}

#[test]
fn truncated_trace_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualprox(&["run", "--scenario", "market", "--iters", "100"], dir.path());
    assert!(o.status.success());
    let csv = dir.path().join("trace.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    let cut: Vec<&str> = text.lines().take(40).collect();
    std::fs::write(&csv, cut.join("\n")).unwrap();
    let o = dualprox(&["verify", "trace.csv"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed trace"));
}

#[test]
fn exported_instance_reproduces_trace_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let run = |src: &[&str], name: &str| {
        let mut args = vec!["run"];
        args.extend_from_slice(src);
        args.extend_from_slice(&["--mode", "async", "--delay", "3", "--schedule", "random:7", "--iters", "2000", "--name", name]);
        let o = dualprox(&args, dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let o = dualprox(&["export", "--scenario", "market", "--out", "market.json"], dir.path());
    assert!(o.status.success());
    run(&["--scenario", "market"], "a");
    run(&["--instance", "market.json"], "b");
    run(&["--scenario", "market"], "c");
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.csv"), read("c.csv"));
    assert_eq!(read("a.meta.json"), read("c.meta.json"));

    let o = dualprox(&["verify", "a.csv", "--instance", "market.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = dualprox(&["export", "--scenario", "consensus", "--out", "consensus.json"], dir.path());
    assert!(o.status.success());
    let o = dualprox(&["verify", "a.csv", "--instance", "consensus.json"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("hash"));
}

#[test]
fn consensus_scenario_with_params() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"edges": [[0, 1], [1, 2], [2, 3]],
        "locals": [
          {"f": {"kind": "quadratic", "params": {"curvature": [[1.0]], "linear": [-1.0], "offset": 0.0}}},
          {"f": {"kind": "quadratic", "params": {"curvature": [[1.0]], "linear": [-2.0], "offset": 0.0}}},
          {"f": {"kind": "quadratic", "params": {"curvature": [[1.0]], "linear": [-3.0], "offset": 0.0}}},
          {"f": {"kind": "quadratic", "params": {"curvature": [[1.0]], "linear": [-6.0], "offset": 0.0}}}
        ]}"#;
    std::fs::write(dir.path().join("c.json"), doc).unwrap();
    let o = dualprox(&["run", "--scenario", "consensus", "--params", "c.json", "--tol", "1e-12", "--json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    for r in v["x_hat"].as_array().unwrap() {
        assert!((r[0].as_f64().unwrap() - 3.0).abs() < 1e-4, "{r}");
    }
}

#[test]
fn repro_json_summary_and_step_injection() {
    let dir = tempfile::tempdir().unwrap();
    let o = dualprox(&["repro", "--json"], dir.path());
    let v = stdout_json(&o);
    let crit = v["criteria"].as_array().unwrap();
    assert_eq!(crit.len(), 11);
    let all = crit.iter().all(|c| c["passed"].as_bool().unwrap());
    assert_eq!(o.status.success(), all);

    let o = dualprox(&["repro", "--step-scale", "2"], dir.path());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("warning") && err.contains("violate"), "{err}");
    assert!(!o.status.success());
}
