use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const COSINE: &str = r#"{"n":1,"g":"flat","A":[[],[{"c":2.0,"pow":[1]},{"c":0.5,"waves":[{"axis":0,"kind":"sin","freq":1.0}]}]],"x0":[0.7,0.0]}"#;
const CONSTANT: &str = r#"{"n":1,"g":"flat","A":[[{"c":-0.75,"pow":[0,1]}],[{"c":0.75,"pow":[1]}]],"x0":[0.0,0.0]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bochner-rho"))
}

fn run_with(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.json");
    std::fs::write(&path, config).unwrap();
    bin().args(args).arg("--config").arg(&path).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn malformed_config_names_the_offending_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), r#"{"tolerances":{"rho":"tight"}}"#, &["rho"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("run.json:tolerances.rho"), "{err}");

    let out = run_with(dir.path(), r#"{"field":{"n":1,"g":"flat","A":[[],[]],"x0":[0,0],"extra":1}}"#, &["rho"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field"));

    let out = run_with(dir.path(), "{not json", &["rho"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_referenced_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), r#"{"field":"nowhere.json"}"#, &["rho"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.json"));
}

#[test]
fn rho_on_cosine_field_spec() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cosine.json"), COSINE).unwrap();
    let out = run_with(dir.path(), r#"{"field":"cosine.json","seed":3}"#, &["rho", "--quiet"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["command"], "rho");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(v["tolerances"]["rho"].as_f64().unwrap() > 0.0);
    let r = &v["result"];
    assert!(r["relative_difference"].as_f64().unwrap() <= 1e-7);
    for key in ["a", "A0", "A1", "J1", "J2", "rho", "im_residue"] {
        assert!(r["closed"].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn rho_on_constant_field_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(r#"{{"field":{CONSTANT}}}"#);
    let out = run_with(dir.path(), &config, &["rho", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["result"]["closed"]["rho"].as_f64().unwrap().abs() < 1e-14);
    assert!((v["result"]["a"][0].as_f64().unwrap() - 1.5).abs() < 1e-14);
}

#[test]
fn oracle_compare_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"oracle":{"ns":[1,2],"fields_per_n":3}}"#;
    let a = run_with(dir.path(), config, &["oracle-compare", "--seed", "17", "--quiet"]);
    let b = run_with(dir.path(), config, &["oracle-compare", "--seed", "17", "--quiet"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 6);
    let c = run_with(dir.path(), config, &["oracle-compare", "--seed", "18", "--quiet"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn impossible_tolerance_fails_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"oracle":{"ns":[2],"fields_per_n":2}}"#;
    let out = run_with(dir.path(), config, &["oracle-compare", "--tol", "1e-300", "--quiet"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn selfcheck_passes_on_defaults() {
    let out = bin().args(["selfcheck", "--quiet"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    let checks = v["result"]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"].as_str().unwrap().contains("oracle D=6 vs D=8")));
    assert_eq!(v["result"]["failed"], 0);
}

#[test]
fn identities_without_a_field_use_a_seeded_one() {
    let out = bin().args(["identities", "--seed", "4", "--quiet"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn torus_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let torus = r#"{"nx":24,"ny":24,"lx":1.0,"ly":1.0,"field":{"b0":6.283185307179586},"p_list":[2,3],"quad_points":8}"#;
    std::fs::write(dir.path().join("torus.json"), torus).unwrap();
    let out_dir = dir.path().join("reports");
    let out = run_with(dir.path(), r#"{"torus":"torus.json"}"#, &["torus", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("torus.csv")).unwrap();
    assert!(csv.starts_with("p,d_p,mean_lambda,mean_lambda_sq,quad_rho_mean,quad_rho_sq_mean,gap_lo,gap_hi\n"));
    assert_eq!(csv.lines().count(), 3);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("torus.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["run"]["reports"][1]["d_p"], 3);
    assert!(report["result"]["trend"]["note"].as_str().unwrap().contains("engineering budget"));
}

#[test]
fn non_integral_flux_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"torus":{"nx":24,"ny":24,"lx":1.0,"ly":1.0,"field":{"b0":5.0},"p_list":[1]}}"#;
    let out = run_with(dir.path(), config, &["torus", "--quiet"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flux"));
}

#[test]
fn mode_in_config_must_match_the_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), r#"{"mode":"torus"}"#, &["rho"]);
    assert_eq!(out.status.code(), Some(2));
}
