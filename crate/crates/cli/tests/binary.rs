use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn corpus(file: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(file).to_string_lossy().into_owned()
}

fn logres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logres")).args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("logres-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn line_has_two_strata() {
    let v = json_of(&logres(&["strata", &corpus("a1.txt")]));
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn irregular_germ() {
    let v = json_of(&logres(&["germ", "fuchs", &corpus("irregular1.txt")]));
    assert_eq!(v, json!({"fuchsian": false}));
}

#[test]
fn names_select_declarations() {
    let v = json_of(&logres(&["faces", &corpus("monoids.txt"), "M6"]));
    assert_eq!(v["count"], 8);
    let v = json_of(&logres(&["germ", "fuchs", &corpus("germs.txt"), "R9"]));
    assert_eq!(v["fuchsian"], true);
}

#[test]
fn full_report_wraps_the_result() {
    let v = json_of(&logres(&["--json", "faces", &corpus("plane.txt")]));
    assert_eq!(v["command"], "faces");
    assert_eq!(v["inputs"], json!(["P"]));
    assert_eq!(v["result"]["count"], 4);
}

#[test]
fn dot_output() {
    let out = logres(&["strata", "--dot", &corpus("plane.txt")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("[label=").count(), 4);
}

fn infinity_degrees(v: &Value) -> Vec<String> {
    v["object"]["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["degree"][1].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn extension_lands_in_the_window() {
    let file = corpus("extension.txt");
    let default = json_of(&logres(&["canext", "extend", &file]));
    for d in infinity_degrees(&default) {
        assert!(["-1/2", "-2/3"].contains(&d.as_str()), "{d}");
    }
    let shifted = json_of(&logres(&["canext", "extend", "--tau", "(0,1]", &file]));
    for d in infinity_degrees(&shifted) {
        assert!(["1/2", "1/3"].contains(&d.as_str()), "{d}");
    }
    let report = json_of(&logres(&["canext", "exponents", &file]));
    assert_eq!(report["adapted"], false);
}

#[test]
fn malformed_window_is_rejected() {
    let out = logres(&["canext", "extend", "--tau", "(0,2]", &corpus("extension.txt")]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn missing_file_exits_two() {
    let out = logres(&["rh", "to-lobject", "missing.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FileNotFound"));
}

#[test]
fn parse_error_exits_three() {
    let file = scratch("truncated.txt", "monoid P = [[1,0],[1,");
    let out = logres(&["faces", &file]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1, column 22"));
    let out = logres(&["--json", "faces", &file]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["diagnostics"][0].as_str().unwrap().starts_with("parse"));
}

#[test]
fn missing_role_exits_two() {
    let out = logres(&["flat", &corpus("a1.txt")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(logres(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(logres(&["faces"]).status.code(), Some(1));
    assert_eq!(logres(&[]).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(logres(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_byte_stable() {
    for args in [
        vec!["higgs".to_string(), corpus("higgs.txt")],
        vec!["cohomology".into(), "compare".into(), corpus("counterexample.txt")],
        vec!["--json".into(), "locsys".into(), "roundtrip".into(), corpus("locsys.txt")],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = logres(&args);
        assert!(first.status.success());
        assert_eq!(first.stdout, logres(&args).stdout);
    }
}

#[test]
fn higgs_reports_violations() {
    let file = scratch(
        "curved.txt",
        "monoid P = N^1 * Z^1\nideal K in P = maximal\nconnection C over (P,K) {\n  U1 = [[\"1/2\",\"0\"],[\"0\",\"0\"]]\n  U2 = [[\"0\",\"0\"],[\"0\",\"0\"]] + [[\"0\",\"1\"],[\"0\",\"0\"]]*x^[0,1]\n}\n",
    );
    let v = json_of(&logres(&["higgs", &file]));
    assert_eq!(v["ok"], false);
    assert!(!v["violated"].as_array().unwrap().is_empty());
    let v = json_of(&logres(&["flat", &file]));
    assert_eq!(v["flat"], false);
}
