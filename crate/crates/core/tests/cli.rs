use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str, file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).join(file)
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tempo2plus")).args(args.iter().map(|a| a.as_ref())).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json, String::from_utf8(out.stderr).unwrap())
}

fn pair(name: &str) -> (PathBuf, PathBuf) {
    (fixture(name, "domain.pddl"), fixture(name, "problem.pddl"))
}

#[test]
fn validate_temporal_reports_verdicts_by_exit_code() {
    let (d, p) = pair("guarded");
    let (code, json, err) = run(&[&"validate-temporal", &d, &p, &fixture("guarded", "after.plan")]);
    assert_eq!((code, json["valid"].as_bool()), (0, Some(true)), "{err}");
    let (code, json, err) = run(&[&"validate-temporal", &d, &p, &fixture("guarded", "invalid-inside.plan")]);
    assert_eq!(code, 1);
    assert_eq!(json["failure"]["condition"], 4);
    assert!(err.contains("invalid (condition 4)"), "{err}");
}

#[test]
fn input_errors_exit_with_two() {
    let (d, p) = pair("match");
    let (code, _, err) = run(&[&"validate-temporal", &d, &p, &"/nonexistent/x.plan"]);
    assert_eq!(code, 2);
    assert!(err.contains("/nonexistent/x.plan"), "{err}");
    for delta in ["0", "-1", "abc"] {
        let (code, _, _) = run(&[&"solve", &d, &p, &"--delta", &delta]);
        assert_eq!(code, 2, "δ = {delta}");
    }
    let (code, _, _) = run(&[&"frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn roundtrip_on_a_small_problem_succeeds() {
    let (d, p) = pair("match-done");
    let (code, json, err) = run(&[&"roundtrip", &d, &p]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json["ok"], true);
    let stages: Vec<_> = json["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap().to_owned()).collect();
    assert_eq!(stages, ["solve", "validate-plus", "lift", "validate-temporal"]);
    let (code, json, _) = run(&[&"roundtrip", &d, &p, &"--plan", &fixture("match-done", "late.plan")]);
    assert_eq!(code, 0);
    assert_eq!(json["stages"][0]["stage"], "validate-temporal-input");
    assert_eq!(json["stages"].as_array().unwrap().len(), 7);
}

#[test]
fn roundtrip_failures() {
    let (d, p) = pair("unsolvable");
    let (code, json, _) = run(&[&"roundtrip", &d, &p, &"--horizon", &"4"]);
    assert_eq!(code, 3);
    assert_eq!(json["failed_stage"], "solve");
    assert_eq!(json["stages"][0]["detail"]["status"], "exhausted");
    let (d, p) = pair("guarded");
    let (code, json, _) = run(&[&"roundtrip", &d, &p, &"--plan", &fixture("guarded", "invalid-inside.plan")]);
    assert_eq!(code, 1);
    assert_eq!(json["failed_stage"], "validate-temporal-input");
}

#[test]
fn solve_writes_both_plans() {
    let dir = tempfile::tempdir().unwrap();
    let (plus, temporal) = (dir.path().join("p.plan"), dir.path().join("t.plan"));
    let (d, p) = pair("match-done");
    let (code, json, _) = run(&[&"solve", &d, &p, &"--out", &plus, &"--out-temporal", &temporal]);
    assert_eq!(code, 0);
    assert_eq!(json["status"], "found");
    assert_eq!(json["makespan"], "3");
    let text = std::fs::read_to_string(&plus).unwrap();
    assert!(text.contains("start-match"), "{text}");
    assert_eq!(std::fs::read_to_string(&temporal).unwrap().trim(), "0: (match) [2]");
}

#[test]
fn compile_writes_files_and_name_map() {
    let dir = tempfile::tempdir().unwrap();
    let (od, op, map) = (dir.path().join("d.pddl"), dir.path().join("p.pddl"), dir.path().join("map.json"));
    let (d, p) = pair("fill");
    let (code, json, err) = run(&[&"compile", &d, &p, &"--out-domain", &od, &"--out-problem", &op, &"--name-map", &map]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json["kind"], "compile");
    let names: Value = serde_json::from_str(&std::fs::read_to_string(&map).unwrap()).unwrap();
    assert!(names["elements"].as_array().unwrap().iter().any(|e| e["role"] == "end-fix-event"));
    let domain = std::fs::read_to_string(&od).unwrap();
    assert!(domain.contains(":event"));

    // the written files validate lowered plans directly
    let plus_plan = dir.path().join("fill.plus");
    let (code, _, err) = run(&[&"lower", &d, &p, &fixture("fill", "twice.plan"), &"--out", &plus_plan]);
    assert_eq!(code, 0, "{err}");
    let (code, json, err) = run(&[&"validate-plus", &od, &op, &plus_plan]);
    assert_eq!((code, &json["valid"]), (0, &Value::Bool(true)), "{err}");
    let (code, _, _) = run(&[&"lift", &d, &p, &plus_plan]);
    assert_eq!(code, 0);
}

#[test]
fn no_expire_drops_expire_events() {
    let (d, p) = pair("hold");
    let (_, with, _) = run(&[&"compile", &d, &p]);
    let (_, without, _) = run(&[&"compile", &d, &p, &"--no-expire"]);
    let has_expire = |j: &Value| j["name_map"]["elements"].as_array().unwrap().iter().any(|e| e["role"] == "expire-event");
    assert!(has_expire(&with));
    assert!(!has_expire(&without));
}

#[test]
fn validate_plus_on_the_fly_compilation() {
    let (d, p) = pair("hold");
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("p.plan");
    std::fs::write(&plan, "0: (start-hold)\n;; makespan 4\n").unwrap();
    let (code, json, err) = run(&[&"validate-plus", &d, &p, &plan, &"--compile", &"--trace", &dir.path().join("trace.json")]);
    assert_eq!(code, 1, "{err}");
    assert_eq!(json["valid"], false);
    assert!(dir.path().join("trace.json").exists());
    let (code, _, _) = run(&[&"lift", &d, &p, &plan]);
    assert_eq!(code, 1);
}
