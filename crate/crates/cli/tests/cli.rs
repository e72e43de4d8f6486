use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semigraph"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn decompose_outputs_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("diag.json"), r#"{"c": 2, "matrix": [[0.5, 0], [0, 1.0]]}"#).unwrap();
    fs::write(p.join("bad.json"), r#"{"c": 1, "matrix": [[0.5]]}"#).unwrap();
    fs::write(p.join("rot.json"), r#"{"c": 2, "matrix": [[0.75, -1], [1, 0.75]]}"#).unwrap();

    let o = run(&["decompose", "diag.json"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["p"], 2);
    assert_eq!(v["blocks"][0]["alpha"], 2.0);
    assert_eq!(v["blocks"][1]["alpha"], 1.0);

    let o = run(&["decompose", "bad.json"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ScalingConstantOutOfRange"), "{}", stderr(&o));

    let v = stdout_json(&run(&["decompose", "rot.json"], p));
    assert_eq!(v["p"], 1);
    assert!((v["blocks"][0]["alpha"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-9);
}

#[test]
fn dim_substitution() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["dim", "--alpha1", "2", "--alpha2", "1", "--d1", "1", "--s", "1"], dir.path());
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["graph"], 1.5);
    assert_eq!(v["graph_branch"], "FAST");
    assert_eq!(v["range"], 1.5);
    assert_eq!(v["sojourn_case"], "III");

    let v = stdout_json(&run(&["dim", "--alpha1", "1.5", "--s", "0.8"], dir.path()));
    assert!((v["graph"].as_f64().unwrap() - (1.0 + 0.8 - 1.0 / 1.5)).abs() < 1e-12);
    assert!(v["range"].is_null());

    let o = run(&["dim", "--alpha1", "2.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidInputs"));
}

#[test]
fn simulate_is_reproducible_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let a = stdout_json(&run(&["simulate", "--n", "12", "--seed", "1", "--out", "a"], p));
    let b = stdout_json(&run(&["--threads", "1", "simulate", "--n", "12", "--seed", "1", "--out", "b"], p));
    assert_eq!(a["sha256"], b["sha256"]);
    assert_eq!(a["points"], 4097);
    let bytes = fs::read(p.join("a/path.bin")).unwrap();
    assert_eq!(bytes, fs::read(p.join("b/path.bin")).unwrap());
    assert_eq!(bytes.len(), 4097 * 2 * 8);
    // First record is (t, X) = (0, 0).
    assert!(bytes[..16].iter().all(|b| *b == 0));

    let side: Value = serde_json::from_slice(&fs::read(p.join("a/path.bin.json")).unwrap()).unwrap();
    assert_eq!(side["seed"], 1);
    assert_eq!(side["config"]["n"], 12);
    assert_eq!(side["config"]["stream"], "simulate/path/0");
    assert!(side["version"].as_str().unwrap().starts_with('v'));
    assert!(side["wall_clock_secs"].as_f64().unwrap() >= 0.0);

    let c = stdout_json(&run(&["simulate", "--n", "12", "--seed", "2", "--out", "c"], p));
    assert_ne!(a["sha256"], c["sha256"]);
}

#[test]
fn config_files_reject_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("cfg.json"), r#"{"n": 10, "seed": 3, "colour": "blue"}"#).unwrap();
    let o = run(&["simulate", "--config", "cfg.json"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidConfig") && stderr(&o).contains("colour"));

    fs::write(p.join("ok.json"), r#"{"n": 10, "seed": 3, "csv": true}"#).unwrap();
    let o = run(&["simulate", "--config", "ok.json", "--out", "o"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(p.join("o/path.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1025);
}

#[test]
fn estimate_and_sojourn_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = run(&["estimate", "--n", "14", "--paths", "2", "--seed", "4", "--out", "e"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["theory"], 1.5);
    for f in ["estimate.csv", "estimate_plot.csv", "estimate_summary.json"] {
        assert!(p.join("e").join(f).exists(), "{f}");
        assert!(p.join("e").join(format!("{f}.json")).exists(), "{f} sidecar");
    }
    let csv = fs::read_to_string(p.join("e/estimate.csv")).unwrap();
    assert!(csv.starts_with("scale,count,stderr\n"));
    // Thread count does not change results.
    let w = stdout_json(&run(
        &["--threads", "2", "estimate", "--n", "14", "--paths", "2", "--seed", "4", "--out", "e2"],
        p,
    ));
    assert_eq!(v["per_path"], w["per_path"]);

    let o = run(&["sojourn", "--n", "12", "--paths", "200", "--seed", "1", "--out", "s"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = stdout_json(&o);
    assert_eq!(v["case"], "IV");
    assert_eq!(v["monotone"], true);
    assert_eq!(v["bounded"], true);
    assert!(p.join("s/sojourn.csv").exists() && p.join("s/sojourn_plot.csv.json").exists());

    let o = run(&["sojourn", "--n", "12", "--paths", "20"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("EnsembleTooSmall"));
}

fn small_scenario(tol: f64) -> Value {
    json!({
        "name": "iso08-small",
        "exponent": {"c": 2, "matrix": [[1.25, -1], [1, 1.25]]},
        "laws": [{"kind": "stable_isotropic2d", "alpha": 0.8}],
        "set": {"kind": "interval", "a": 0, "b": 1},
        "n": 14, "paths": 32, "seed": 3,
        "sojourn": {"n": 12, "paths": 200, "horizon": 1.0},
        "energy": {"paths": 1, "m": 1024},
        "tolerance": {"graph": tol, "sojourn": 0.15, "coherence": 0.1, "energy_floor": 0.25},
        "expected": {"graph": 1.0, "range": 0.8, "sojourn_case": "II", "sojourn_exponent": 1.0}
    })
}

#[test]
fn verify_exit_codes_follow_verdicts() {
    // This configuration estimates 0.865 ± 0.015 against a theory of 1.
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for (tol, code) in [(0.2, 0), (0.05, 1), (0.1, 3)] {
        fs::write(p.join("sc.json"), small_scenario(tol).to_string()).unwrap();
        let o = run(&["verify", "--scenario-file", "sc.json", "--stages", "box"], p);
        assert_eq!(o.status.code(), Some(code), "tol {tol}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn verify_rejects_stale_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let mut sc = small_scenario(0.1);
    sc["expected"]["graph"] = json!(1.1);
    fs::write(dir.path().join("sc.json"), sc.to_string()).unwrap();
    let o = run(&["verify", "--scenario-file", "sc.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("StaleExpectation"));
    let o = run(&["verify", "--scenario", "no-such-scenario"], dir.path());
    assert!(stderr(&o).contains("UnknownScenario"));
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("sc.json"), small_scenario(0.2).to_string()).unwrap();
    for out in ["r1", "r2"] {
        let o = run(&["verify", "--scenario-file", "sc.json", "--out", out], p);
        assert!(o.status.code().is_some_and(|c| c != 2), "{}", stderr(&o));
    }
    let a = fs::read(p.join("r1/report.json")).unwrap();
    assert_eq!(a, fs::read(p.join("r2/report.json")).unwrap());
    assert_eq!(
        fs::read(p.join("r1/report.txt")).unwrap(),
        fs::read(p.join("r2/report.txt")).unwrap()
    );
    let report: Value = serde_json::from_slice(&a).unwrap();
    let checks = report["scenarios"][0]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
}

#[test]
fn verify_brownian_interval_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--scenario", "brownian-interval", "--seed", "7"], dir.path());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("overall: PASS"));
}

#[test]
fn sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("empty.json"), r#"{"alphas": [], "sets": [], "n": 12, "paths": 2, "seed": 0}"#).unwrap();
    let o = run(&["sweep", "--config", "empty.json", "--out", "w"], p);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(p.join("w/sweep.csv")).unwrap(), "alpha,set_dim,theory,estimate,stderr,verdict\n");

    let o = run(&["sweep", "--alphas", "1.5,2", "--n", "12", "--paths", "2", "--out", "w2"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(p.join("w2/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let o = run(&["sweep", "--alphas", "2", "--n", "12", "--paths", "2", "--budget-secs", "0"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("BudgetExceeded"));
}
