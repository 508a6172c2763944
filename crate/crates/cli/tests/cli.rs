use std::path::Path;
use std::process::Command;

use anyonspectra_cli::run_with;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("anyonspectra").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn sidecar(p: &Path, suffix: &str) -> std::path::PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

#[test]
fn verify_writes_report_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let r = run(&["verify", "--group", "Z2", "--torus", "2x2", "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let v = json_file(&out);
    assert_eq!(v["pass"], Value::Bool(true));
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c["name"].is_string() && c["residual"].as_f64().unwrap() < 1e-12 && c["pass"] == true);
    }
    let cfg = json_file(&sidecar(&out, ".config.json"));
    assert_eq!(cfg["command"], "verify");
    assert_eq!(cfg["config"]["torus"], "2x2");
}

#[test]
fn bands_grid_is_deterministic() {
    let a = run(&["bands", "--grid", "3"]);
    let b = run(&["bands", "--grid", "3"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let lines: Vec<&str> = a.stdout.lines().collect();
    assert_eq!(lines[0], "kx,ky,E1,E2,E3,E4");
    assert_eq!(lines.len(), 10);
    for l in &lines[1..] {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v.len(), 6);
        assert!(v[2] <= v[3] && v[3] <= v[4] && v[4] <= v[5]);
    }
    let j = run(&["bands", "--grid", "2", "--format", "json"]);
    let v: Value = serde_json::from_str(&j.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn boundstates_on_both_lines() {
    let r = run(&["boundstates", "--lambda", "1", "--rho", "1", "--kx", "0", "--window", "40"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["converged"], true);
    let numeric: Vec<f64> = v["numeric_energies"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(numeric.len(), 4);
    for (e, want) in numeric.iter().zip([-5.0, -5.0, 5.0, 5.0]) {
        assert!((e - want).abs() < 1e-8);
    }
    assert!((v["gap"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let r = run(&["boundstates", "--line", "ky", "--ky", "0.2", "--window", "20"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["line"], "ky");
    assert_eq!(v["numeric_energies"].as_array().unwrap().len(), 4);
}

#[test]
fn no_bound_states_is_not_a_failure() {
    let r = run(&["boundstates", "--rho", "0", "--kx", "0.3", "--window", "12"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(v["numeric_energies"].as_array().unwrap().is_empty());
    assert!(v.get("gap").is_none());
}

#[test]
fn fiberspec_writes_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fiber.csv");
    let r = run(&["fiberspec", "--lambda", "1", "--rho", "1", "--ky", "0.7853981633974483", "--window", "10", "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "index,energy,is_outlier,ipr");
    assert_eq!(csv.lines().count(), 1 + 400);
    let meta = json_file(&sidecar(&out, ".meta.json"));
    assert_eq!(meta["dim"], 400);
    assert_eq!(meta["outliers"].as_array().unwrap().len(), 4);
    assert_eq!(csv.lines().filter(|l| l.contains(",true,")).count(), 4);
}

#[test]
fn small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let r = run(&["sweep", "--lambda-min", "0.5", "--lambda-max", "1", "--steps", "3", "--window", "8", "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 256);
    let meta = json_file(&sidecar(&out, ".meta.json"));
    assert_eq!(meta["lambdas"].as_array().unwrap().len(), 3);
    assert_eq!(meta["outlier_counts"].as_array().unwrap().len(), 3);
}

#[test]
fn holonomy_defaults_wind_once() {
    let r = run(&["holonomy", "--group", "Z3", "--chi", "1", "--g", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["winding"], 1);
    assert_eq!(v["pass"], true);
    assert!((v["measured"]["im"].as_f64().unwrap() - 0.75f64.sqrt()).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["bands", "--nonsense"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["boundstates", "--lambda", "0"]).code, 2);
    assert_eq!(run(&["fiberspec", "--kx", "nan"]).code, 2);
    assert_eq!(run(&["verify", "--torus", "1x2"]).code, 2);
    assert_eq!(run(&["bands", "--group", "Z0"]).code, 2);
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("fiberspec"));
}

#[test]
fn negative_rho_is_accepted() {
    let r = run(&["boundstates", "--rho", "-3", "--kx", "0.2", "--window", "16"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["numeric_energies"].as_array().unwrap().len(), 4);
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"grid": 2, "mass": 0.5}"#).unwrap();
    let out = dir.path().join("bands.csv");
    let r = run(&["bands", "--grid", "7", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 5);
    let resolved = json_file(&sidecar(&out, ".config.json"));
    assert_eq!(resolved["config"]["grid"], 2);
    assert_eq!(resolved["config"]["mass"].as_f64(), Some(0.5));

    std::fs::write(&cfg, r#"{"gird": 2}"#).unwrap();
    assert_eq!(run(&["bands", "--config", cfg.to_str().unwrap()]).code, 2);
    std::fs::write(&cfg, "not json").unwrap();
    assert_eq!(run(&["bands", "--config", cfg.to_str().unwrap()]).code, 2);
}

#[test]
fn thread_variable_is_validated() {
    let bin = env!("CARGO_BIN_EXE_anyonspectra");
    let bad = Command::new(bin).args(["bands", "--grid", "2"]).env("ANYONSPECTRA_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let one = Command::new(bin).args(["bands", "--grid", "2"]).env("ANYONSPECTRA_THREADS", "1").output().unwrap();
    let free = Command::new(bin).args(["bands", "--grid", "2"]).env_remove("ANYONSPECTRA_THREADS").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, free.stdout);
}
