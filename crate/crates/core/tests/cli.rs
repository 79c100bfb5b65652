use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use commlab::finengine::library;
use serde_json::Value;

fn commlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commlab")).args(args).env_remove("COMMLAB_BUDGET").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn algebra_file(dir: &tempfile::TempDir, name: &str, alg: &commlab::finengine::FiniteAlgebra) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(&alg.to_file()).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn schema() -> jsonschema::JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&schema).unwrap()
}

#[test]
fn eval_examples() {
    for (expr, want) in [("f(a(1,0), b(2,0))", "d(1)"), ("u(c)", "a(1,0)"), ("f(c, c)", "t([c,c],0)")] {
        let o = commlab(&["eval", "--n", "2", expr]);
        assert!(o.status.success(), "{expr}");
        assert_eq!(stdout(&o).trim(), want);
        // Printed elements re-parse to themselves.
        let again = commlab(&["eval", "--n", "2", want]);
        assert_eq!(stdout(&again).trim(), want);
    }
}

#[test]
fn eval_errors_exit_2() {
    let o = commlab(&["eval", "f(a(1,0)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(commlab(&["eval", "f(x0, c)"]).status.code(), Some(2));
}

#[test]
fn n_below_two_is_a_usage_error() {
    let o = commlab(&["paper-verify", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn depth_zero_suite_is_vacuous_and_valid_json() {
    let o = commlab(&["paper-verify", "--n", "2", "--max-depth", "0", "--format", "json", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let schema = schema();
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 7);
    for line in &lines {
        assert!(schema.is_valid(line), "{line}");
        assert_eq!(line["outcome"], "pass");
    }
}

#[test]
fn budget_env_and_flag_precedence() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_commlab"));
        cmd.args(["paper-verify", "--max-depth", "0", "--format", "json", "--no-timing"]);
        cmd.env_remove("COMMLAB_BUDGET");
        if let Some(v) = env {
            cmd.env("COMMLAB_BUDGET", v);
        }
        if let Some(v) = flag {
            cmd.args(["--budget", v]);
        }
        cmd.output().unwrap()
    };
    let starved = run(Some("10"), None);
    assert_eq!(starved.status.code(), Some(2));
    let schema = schema();
    for l in stdout(&starved).lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        assert!(schema.is_valid(&v), "{v}");
    }
    assert!(stdout(&starved).contains("\"outcome\":\"budget\""));
    assert_eq!(run(Some("10"), Some("1000000")).status.code(), Some(0));
    assert_eq!(run(None, Some("10")).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let o = commlab(&["eval", "u(c)", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap().trim(), "a(1,0)");
}

#[test]
fn fin_examples() {
    let dir = tempfile::tempdir().unwrap();
    let semi = algebra_file(&dir, "semi.json", &library::meet_semilattice());
    let z2 = algebra_file(&dir, "z2.json", &library::cyclic_group(2));
    let z4 = algebra_file(&dir, "z4.json", &library::cyclic_group(4));

    let o = commlab(&["fin", "series", "--max-m", "3", "--format", "json", &semi]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["series"], serde_json::json!([[[0, 1]], [[0, 1]]]));
    assert_eq!(v["supernilpotence_degree"], Value::Null);

    let o = commlab(&["fin", "commutator", "--m", "2", "--format", "json", &z2]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"], serde_json::json!([[0], [1]]));

    let o = commlab(&["fin", "simple", &z4]);
    assert_eq!(stdout(&o).trim(), "simple: false");

    let o = commlab(&["fin", "tc", "--m", "2", "--delta", "[[0,2],[1,3]]", &z4]);
    assert!(stdout(&o).contains("holds"));
}

#[test]
fn general_arguments_are_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let z4 = algebra_file(&dir, "z4.json", &library::cyclic_group(4));
    let o = commlab(&["fin", "commutator", "--m", "2", "--alpha", "[[0,2],[1,3]]", "--alpha", "[[0,1,2,3]]", &z4]);
    assert!(stdout(&o).starts_with("term-condition commutator"));
    let o = commlab(&["fin", "commutator", "--m", "2", "--alpha", "[[0,2],[1,3]]", &z4]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fin_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(["fin", "simple", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(br#"{"size":3,"operations":[{"symbol":"+","arity":2,"table":[0,1,2,1,2,0,2,0,1]}]}"#).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o).trim(), "simple: true");
}

#[test]
fn bad_algebra_files_exit_2_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"size":2,"operations":[{"symbol":"m","arity":2,"table":[0,0,1]}]}"#, "needs 4"),
        (r#"{"size":2,"operations":[{"symbol":"m","arity":1,"table":[0,5]}]}"#, "operations[0]"),
        ("{\"size\": 2,\n \"operations\": [", "line 2"),
        (r#"{"size":2,"operations":[],"extra":1}"#, "extra"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&path, text).unwrap();
        let o = commlab(&["fin", "simple", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{err}");
    }
    assert_eq!(commlab(&["fin", "simple", "/nonexistent/alg.json"]).status.code(), Some(2));
}
