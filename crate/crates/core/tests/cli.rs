use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qht")).args(args).output().expect("spawn qht")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn states_lists_the_catalog() {
    let out = qht(&["states"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("vacuum") && rows[0].contains("0.1591549") && rows[0].contains("alpha < 0.25"));
    let v = stdout_json(&qht(&["states", "--json"]));
    let thermal = &v["states"][5];
    assert_eq!(thermal["state"], "thermal:1");
    assert!((thermal["true_purity"].as_f64().unwrap() - 0.5f64.tanh() / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    let sim =
        stdout_json(&qht(&["simulate", "--state", "vacuum", "--eta", "0.9", "--n", "1000", "--seed", "5", "--out", d]));
    let csv = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1001);
    assert_eq!(sim["config"]["seed"], 5);
    assert_eq!(sim["sha256"].as_str().unwrap().len(), 64);

    let again =
        stdout_json(&qht(&["simulate", "--state", "vacuum", "--eta", "0.9", "--n", "1000", "--seed", "5", "--out", d]));
    assert_eq!(sim["sha256"], again["sha256"]);

    let input = dir.path().join("samples.csv");
    let est = stdout_json(&qht(&[
        "estimate",
        "--input",
        path(&input),
        "--eta",
        "0.9",
        "--rule",
        "delta_star",
        "--alpha",
        "0.2",
        "--r",
        "2",
        "--state",
        "vacuum",
    ]));
    for key in ["d2_hat", "delta", "rule", "t_max", "nodes", "eta", "n", "true_purity", "abs_error", "config"] {
        assert!(est.get(key).is_some(), "missing {key}");
    }
    assert_eq!(est["n"], 1000);
    assert_eq!(est["rule"], "delta_star");
    assert_eq!(est["config"]["class"]["alpha"], 0.2);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"state": {"kind": "thermal", "beta": 1.0}, "eta": 0.8, "n": 50, "seed": 1}"#).unwrap();
    let out = stdout_json(&qht(&["simulate", "--config", path(&cfg), "--eta", "0.95", "--out", path(dir.path())]));
    assert_eq!(out["config"]["eta"], 0.95);
    assert_eq!(out["config"]["state"]["kind"], "thermal");

    std::fs::write(&cfg, r#"{"eta": 0.8, "bogus": 1}"#).unwrap();
    let bad = qht(&["simulate", "--config", path(&cfg)]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("bogus"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    assert_eq!(qht(&["simulate", "--state", "vacuum", "--eta", "1.0", "--n", "10", "--out", d]).status.code(), Some(2));
    let missing = dir.path().join("nope.csv");
    assert_eq!(qht(&["estimate", "--input", path(&missing), "--eta", "0.9", "--delta", "0.3"]).status.code(), Some(4));

    qht(&["simulate", "--state", "vacuum", "--eta", "0.9", "--n", "50", "--out", d]);
    let input = dir.path().join("samples.csv");
    let r2 = qht(&[
        "estimate",
        "--input",
        path(&input),
        "--eta",
        "0.9",
        "--rule",
        "delta_opt",
        "--alpha",
        "0.2",
        "--r",
        "2",
    ]);
    assert_eq!(r2.status.code(), Some(2));
    // a·T² far above the working-precision limit
    let wide = qht(&["estimate", "--input", path(&input), "--eta", "0.5", "--delta", "0.01"]);
    assert_eq!(wide.status.code(), Some(3));
    assert_eq!(qht(&["rates", "--alpha", "0.25", "--r", "2", "--eta", "0.5", "--n", "1000"]).status.code(), Some(3));
}

#[test]
fn rates_rows_follow_the_regime() {
    let out = qht(&["rates", "--alpha", "0.2", "--r", "2", "--eta", "0.9", "--n", "10000", "--json"]);
    let v = stdout_json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["rule"], "delta_star");
    assert_eq!(rows[0]["regime"], "r2_parametric");
    assert_eq!(rows[0]["rate"], 1e-4);

    let v = stdout_json(&qht(&["rates", "--alpha", "0.25", "--r", "1", "--eta", "0.9", "--n", "1000000", "--json"]));
    let names: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["rule"].as_str().unwrap()).collect();
    assert_eq!(names, ["delta_opt", "adaptive1", "adaptive2", "iterative"]);
}

#[test]
fn experiment_writes_csvs_deterministically() {
    // Same relative output path in two working directories, so the echoed config matches too.
    let run = |dir: &Path| {
        let out = Command::new(env!("CARGO_BIN_EXE_qht"))
            .current_dir(dir)
            .args([
                "experiment",
                "--state",
                "vacuum",
                "--eta",
                "0.9",
                "--n-grid",
                "200,400,800",
                "--replicates",
                "6",
                "--rule",
                "delta_star",
                "--alpha",
                "0.2",
                "--r",
                "2",
                "--seed",
                "9",
                "--out",
                "res",
            ])
            .output()
            .unwrap();
        stdout_json(&out)
    };
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let summary = run(da.path());
    run(db.path());
    let (a, b) = (da.path().join("res"), db.path().join("res"));
    let mse = std::fs::read_to_string(a.join("mse.csv")).unwrap();
    let mut lines = mse.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,mean_estimate,bias,variance,mse,mse_stderr,theoretical_rate,bias_bound_sq,var_bound"
    );
    assert_eq!(lines.count(), 3);
    let norm = std::fs::read_to_string(a.join("normality.csv")).unwrap();
    assert!(norm.starts_with("replicate,residual\n"));
    assert_eq!(norm.lines().count(), 7);
    for f in ["mse.csv", "normality.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    for key in ["ks_distance", "skewness", "excess_kurtosis", "config"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
}
