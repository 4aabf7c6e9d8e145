use std::process::Command;

use period_space::cli::run;
use serde_json::{json, Value};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("period-space").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn k3_signature_json() {
    let (code, out, _) = call(&["signature", "--lattice", "K3", "--exact"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v, json!({"positive": 3, "negative": 19, "zero": 0}));
}

#[test]
fn gram_file_signature() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "2\n0 1/2\n1/2 0\n").unwrap();
    let (code, out, _) = call(&["signature", "--gram", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v, json!({"positive": 1, "negative": 1, "zero": 0}));
}

#[test]
fn torus_dims_single() {
    let (code, out, _) = call(&["torus-dims", "--n", "2"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v, json!({"all": 8, "orthogonal": 2, "cau": 6}));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&["no-such-command"]).0, 2);
    assert_eq!(call(&["closedness", "--samples", "many"]).0, 2);
    assert_eq!(call(&[]).0, 2);
}

#[test]
fn failed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1 2 3\n4 5\n").unwrap();
    let (code, _, err) = call(&["signature", "--gram", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
    assert_eq!(call(&["signature", "--lattice", "nonsense"]).0, 1);
}

#[test]
fn manifest_goes_to_stderr_without_out() {
    let (code, _, err) = call(&["torus-dims", "--n", "1", "--seed", "3"]);
    assert_eq!(code, 0);
    let m: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(m["subcommand"], "torus-dims");
    assert_eq!(m["seed"], 3);
    assert_eq!(m["passed"], true);
}

#[test]
fn out_writes_body_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rank.json");
    let (code, stdout, _) = call(&["period-rank", "--family", "twistor", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let body: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(body["rank"], 2);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rank.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "period-rank");
    assert!(manifest["wall_time_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn density_csv_header() {
    let (code, out, _) = call(&["density", "--negative", "--heights", "1,2"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "H,n_vectors,n_hits,covering_radius,max_residual,wall_time_ms");
    assert_eq!(lines.count(), 2);
}

#[test]
fn binary_matches_library_entry() {
    let out = Command::new(env!("CARGO_BIN_EXE_period-space")).args(["torus-dims", "--n", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (_, lib, _) = call(&["torus-dims", "--n", "3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib);
}
