use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BALL: &str = r#"{"n": 2, "kind": "euclidean", "params": {"radius": 1.0}}"#;
const BIG_BALL: &str = r#"{"n": 2, "kind": "euclidean", "params": {"radius": 1.1}}"#;

fn cbp(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CBP_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(out: &Path, stem: &str) -> Value {
    let text = std::fs::read_to_string(out.join(format!("{stem}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cbp(dir.path(), &["validate", BALL]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "validate");
    assert_eq!(r["schema_version"], 1);
    assert!(r["artifact_version"].as_str().unwrap().starts_with("cbp "));
    assert_eq!(r["config"]["settings"]["seed"], 20_240_601);
    assert!(dir.path().join("validate.csv").exists());
    assert!(dir.path().join("validate.meta.json").exists());

    let bad = r#"{"n": 2, "kind": "perturbed", "params": {"radius": 1.0, "terms": [{"degree": 2, "index": 0, "coeff": 10.0}]}}"#;
    let o = cbp(dir.path(), &["validate", bad]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("convexity"));

    let o = cbp(dir.path(), &["validate", "{\"n\": 2, \"kind\""]);
    assert_eq!(code(&o), 3);
    let o = cbp(dir.path(), &["validate", "/no/such/body.json"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn body_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ell.json");
    std::fs::write(&path, r#"{"n": 2, "kind": "ellipsoid", "params": {"semiaxes": [1.0, 2.0]}}"#).unwrap();
    let o = cbp(dir.path(), &["section", path.to_str().unwrap(), "--xi", "1,0,0,0", "--method", "direct"]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "section");
    let v = r["result"]["directions"][0]["direct"]["value"].as_f64().unwrap();
    assert!((v - 4.0 * std::f64::consts::PI).abs() < 1e-10, "{v}");
}

#[test]
fn section_both_on_ball_and_lq4() {
    let dir = tempfile::tempdir().unwrap();
    let o = cbp(dir.path(), &["section", BALL, "--xi", "1,0,0,0", "--method", "both"]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "section");
    let row = &r["result"]["directions"][0];
    let pi = std::f64::consts::PI;
    assert!((row["direct"]["value"].as_f64().unwrap() - pi).abs() < 1e-12);
    assert!((row["fourier"]["value"].as_f64().unwrap() - pi).abs() < 1e-10);
    assert!(row["discrepancy"].as_f64().unwrap() <= 1e-10);

    let lq4 = r#"{"n": 2, "kind": "lq", "params": {"q": 4}}"#;
    let o = cbp(dir.path(), &["section", lq4, "--grid", "64"]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "section");
    assert_eq!(r["result"]["directions"].as_array().unwrap().len(), 64);
    assert!(r["result"]["max_discrepancy"].as_f64().unwrap() <= 5e-3);
    let csv = std::fs::read_to_string(dir.path().join("section.csv")).unwrap();
    assert_eq!(csv.lines().count(), 65);
    assert!(csv.starts_with("index,xi,direct,direct_error,fourier,fourier_error,discrepancy"));
}

#[test]
fn theorem_golden_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let o = cbp(dir.path(), &["theorem", "--which", "stability", "--k", BIG_BALL, "--l", BALL]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "theorem-stability");
    let margin = r["result"]["margin"].as_f64().unwrap();
    assert!((margin - 0.1933).abs() < 1e-4, "{margin}");

    let o = cbp(dir.path(), &["theorem", "--which", "gamma", "--n-max", "170"]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "theorem-gamma");
    assert_eq!(r["result"].as_array().unwrap().len(), 170);

    let l6 = r#"{"n": 4, "kind": "lq", "params": {"q": 6}}"#;
    let o = cbp(dir.path(), &["theorem", "--which", "positivity", "--k", l6, "--mode", "exploratory"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "theorem-positivity");
    assert!(r["result"]["min"].is_number());
    assert!(r["result"].get("pass").is_none());

    let o = cbp(dir.path(), &["theorem", "--which", "positivity", "--k", l6]);
    assert_eq!(code(&o), 3);
}

#[test]
fn theorem_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = cbp(dir.path(), &["theorem", "--which", "stability", "--k", BALL]);
    assert_eq!(code(&o), 3);
    let ball3 = r#"{"n": 3, "kind": "euclidean", "params": {"radius": 1.0}}"#;
    let o = cbp(dir.path(), &["theorem", "--which", "corollary1", "--k", BALL, "--l", ball3]);
    assert_eq!(code(&o), 3);
    let o = cbp(dir.path(), &["theorem", "--which", "nonsense"]);
    assert_eq!(code(&o), 3);
    let o = cbp(dir.path(), &["frobnicate"]);
    assert_eq!(code(&o), 3);
    let o = cbp(dir.path(), &["--help"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn separation_and_parseval() {
    let dir = tempfile::tempdir().unwrap();
    let big = r#"{"n": 2, "kind": "euclidean", "params": {"radius": 1.2}}"#;
    let o = cbp(dir.path(), &["theorem", "--which", "separation", "--k", BALL, "--l", big]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "theorem-separation");
    assert!(r["result"]["margin"].as_f64().unwrap().abs() <= 1e-9);

    let o = cbp(dir.path(), &["theorem", "--which", "parseval", "--k", BALL, "--l", BALL]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "theorem-parseval");
    assert!(r["result"]["relative_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"output_dir": "unused"}"#).unwrap();
    let args = ["theorem", "--which", "corollary1", "--k", BALL, "--l", BIG_BALL, "--config", cfg.to_str().unwrap()];
    let shared = tempfile::tempdir().unwrap();
    assert_eq!(code(&cbp(shared.path(), &args)), 0);
    let first = std::fs::read(shared.path().join("theorem-corollary1.json")).unwrap();
    assert_eq!(code(&cbp(shared.path(), &args)), 0);
    let second = std::fs::read(shared.path().join("theorem-corollary1.json")).unwrap();
    assert_eq!(first, second);
    let csv = std::fs::read(shared.path().join("theorem-corollary1.csv")).unwrap();
    assert_eq!(code(&cbp(a.path(), &args)), 0);
    assert_eq!(csv, std::fs::read(a.path().join("theorem-corollary1.csv")).unwrap());
    assert_eq!(code(&cbp(b.path(), &["volume", BALL])), 0);
}

#[test]
fn threads_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cbp"))
        .args(["validate", BALL, "--out"])
        .arg(dir.path())
        .env("CBP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    let o = Command::new(env!("CARGO_BIN_EXE_cbp"))
        .args(["validate", BALL, "--out"])
        .arg(dir.path())
        .env("CBP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validate.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["threads"], 1);

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"settings": {"levelz": 3}}"#).unwrap();
    let o = cbp(dir.path(), &["validate", BALL, "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn volume_and_ft_commands() {
    let dir = tempfile::tempdir().unwrap();
    let poly = r#"{"n": 2, "kind": "lq", "params": {"q": "inf"}}"#;
    let o = cbp(dir.path(), &["volume", poly]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "volume");
    let v = r["result"]["quadrature"]["value"].as_f64().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((v - pi2).abs() < 1e-12 * pi2);
    assert_eq!(r["result"]["closed_form"].as_f64().unwrap(), pi2);

    let o = cbp(dir.path(), &["ft", BALL, "--p", "2", "--grid", "4"]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "ft");
    let target = 4.0 * std::f64::consts::PI.powi(2);
    for row in r["result"]["values"].as_array().unwrap() {
        assert!((row["value"].as_f64().unwrap() - target).abs() < 1e-10 * target);
    }
    let o = cbp(dir.path(), &["ft", BALL, "--p", "4"]);
    assert_eq!(code(&o), 3);
}
