use std::fs;

use kstar::cli::{run, RunOutput};
use serde_json::Value;
use tempfile::TempDir;

fn kstar(args: &[&str]) -> RunOutput {
    run(std::iter::once("kstar").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = kstar(&full);
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn bound_table_contains_club() {
    let doc = json(&["bound", "--p", "3", "--n", "2", "--k", "2"]);
    let row = &doc["result"]["table"][0];
    assert!((row["club"].as_f64().unwrap() - 30.36).abs() < 0.01);
    for key in ["p", "n", "k", "lambda", "u_star", "spade", "club", "w_constant", "w_bound"] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
    let human = kstar(&["bound", "--p", "3", "--n", "2", "--k", "2"]);
    assert!(human.stdout.contains("30.36"));
    let csv = kstar(&["bound", "--p", "3,5", "--n", "1", "--format", "csv"]);
    assert_eq!(csv.stdout.lines().count(), 3);
}

#[test]
fn check_reports_shape_free() {
    let dir = TempDir::new().unwrap();
    let set = write(&dir, "a.txt", "# {0,1}\n0\n1\n");
    let out = kstar(&["check", "--p", "3", "--n", "1", "--k", "1", "--set", &set]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("shape-free: true"));
    let full = write(&dir, "f.txt", "0\n1\n2\n");
    let out = kstar(&["check", "--p", "3", "--n", "1", "--k", "1", "--set", &full]);
    assert!(out.stdout.contains("shape-free: false"));
}

#[test]
fn lambda_example_and_echo() {
    let doc = json(&["lambda", "--m", "1", "--alpha", "1/3", "--h", "2"]);
    assert!((doc["result"]["u_star"].as_f64().unwrap() - 0.593070).abs() < 1e-6);
    assert!((doc["result"]["lambda"].as_f64().unwrap() - 2.755105).abs() < 1e-6);
    assert_eq!(doc["config"]["alpha_exact"], "1/3");

    let dec = json(&["lambda", "--m", "1", "--alpha", "0.3333333333", "--h", "2"]);
    assert_eq!(dec["config"]["alpha"], "0.3333333333");
    assert_eq!(dec["config"]["alpha_exact"], Value::Null);
    assert_ne!(dec["config"], doc["config"]);
}

#[test]
fn structured_output_is_deterministic() {
    let args = ["search", "--p", "3", "--n", "3", "--heuristic", "--seed", "9", "--iterations", "200", "--format", "json"];
    let a = kstar(&args);
    let b = kstar(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(doc["config"]["seed"], 9);
    assert_eq!(doc["config"]["method"], "heuristic");
    assert_eq!(doc["config"]["threads"], 1);
}

#[test]
fn search_witness_round_trips_into_check() {
    let dir = TempDir::new().unwrap();
    let witness = dir.path().join("w.txt").display().to_string();
    let doc = json(&["search", "--p", "3", "--n", "2", "--k", "1", "--exact", "--witness", &witness]);
    assert_eq!(doc["result"]["size"], 4);
    assert_eq!(doc["result"]["optimal"], true);
    let checked = json(&["check", "--p", "3", "--n", "2", "--k", "1", "--set", &witness]);
    assert_eq!(checked["result"]["shape-free"], true);
    assert_eq!(checked["result"]["size"], 4);
}

#[test]
fn input_errors_exit_one_and_name_the_field() {
    let out = kstar(&["bound", "--p", "9", "--n", "1"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("p"));
    let out = kstar(&["bound", "--p", "3", "--n", "1", "--frobnicate"]);
    assert_eq!(out.code, 1);

    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "0,1\n");
    let out = kstar(&["check", "--p", "3", "--n", "1", "--set", &bad]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("set"));
    let out = kstar(&["check", "--p", "3", "--n", "1", "--set", "/nonexistent/file"]);
    assert_eq!(out.code, 1);

    let out = kstar(&["lambda", "--m", "1", "--alpha", "-1", "--h", "2"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("alpha"));
}

#[test]
fn unwritable_output_exits_one() {
    let out = kstar(&["lambda", "--m", "1", "--alpha", "1/3", "--h", "2", "--output", "/nonexistent/dir/out.json"]);
    assert_eq!(out.code, 1);
}

#[test]
fn output_path_receives_document() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("doc.json").display().to_string();
    let out = kstar(&["lambda", "--m", "1", "--alpha", "1/3", "--h", "2", "--format", "json", "--output", &path]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["command"], "lambda");
}

#[test]
fn multicolor_budget_exits_two() {
    let dir = TempDir::new().unwrap();
    let rows = write(&dir, "m.txt", "0,0;0,0;0,0\n1,0;1,0;1,0\n0,1;0,1;0,1\n1,1;1,1;1,1\n");
    let ok = json(&["multicolor", "--p", "3", "--n", "2", "--k", "1", "--rows", &rows]);
    assert_eq!(ok["result"]["multicolored"], true);
    let out = kstar(&["multicolor", "--p", "3", "--n", "2", "--k", "1", "--rows", &rows, "--budget", "3"]);
    assert_eq!(out.code, 2);
}

#[test]
fn extend_pack_enumerate_replay() {
    let dir = TempDir::new().unwrap();
    let rows = write(&dir, "m.txt", "0;1;2\n");
    let doc = json(&["extend", "--p", "3", "--n", "1", "--k", "1", "--rows", &rows, "--i", "1", "--j", "3"]);
    assert_eq!(doc["result"]["pairs"], serde_json::json!([["0", "2"]]));
    let out = kstar(&["extend", "--p", "3", "--n", "1", "--k", "1", "--rows", &rows, "--i", "2", "--j", "2"]);
    assert_eq!(out.code, 1);

    let full = write(&dir, "f.txt", "0\n1\n2\n");
    let doc = json(&["pack", "--p", "3", "--n", "1", "--k", "1", "--set", &full]);
    assert_eq!(doc["result"]["family_size"], 1);
    assert_eq!(doc["result"]["maximal"], true);

    let doc = json(&["enumerate", "--p", "3", "--n", "1", "--k", "1", "--set", &full]);
    assert_eq!(doc["result"]["semishapes"], "9");
    assert_eq!(doc["result"]["shapes"], "6");

    let doc = json(&["replay", "--p", "3", "--n", "1", "--k", "2", "--set", &full]);
    assert_eq!(doc["result"]["case"], "lifted");
    assert_eq!(doc["result"]["all_hold"], true);

    let line5 = write(&dir, "l5.txt", "0\n1\n2\n3\n4\n");
    let out = kstar(&["replay", "--p", "5", "--n", "1", "--k", "2", "--set", &line5]);
    assert_eq!(out.code, 1);
}

#[test]
fn custom_and_builtin_systems() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "s.txt", "3 1\n1 1 -2\n");
    let set = write(&dir, "a.txt", "0\n1\n2\n");
    let doc = json(&["check", "--p", "5", "--n", "1", "--system", &sys, "--set", &set]);
    assert_eq!(doc["config"]["system"], "custom");
    assert_eq!(doc["result"]["shape-free"], false);
    let zero = write(&dir, "z.txt", "3 1\n5 5 10\n");
    let out = kstar(&["check", "--p", "5", "--n", "1", "--system", &zero, "--set", &set]);
    assert_eq!(out.code, 1);

    let doc = json(&["search", "--p", "3", "--n", "2", "--shape", "w"]);
    assert_eq!(doc["config"]["system"], "w_shape");
    assert_eq!(doc["result"]["verified_shape_free"], true);
    assert!(doc["result"].get("club_bound").is_none());
}
