mod common;

use std::process::{Command, Output};

use serde_json::Value;

fn obo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture() -> String {
    common::fixture("worked_example.json").display().to_string()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn solve_full_budget_converts_everyone() {
    let v = json(&obo(&["solve", &fixture()]));
    assert_eq!(v["supporter_count"], 12);
}

#[test]
fn solve_293_pays_a_and_j() {
    let v = json(&obo(&["solve", "--budget", "293", &fixture()]));
    assert_eq!(v["supporter_count"], 8);
    assert_eq!(v["optimality"], "Proven");
    let p = &v["payments"];
    assert!((p["a"].as_f64().unwrap() - 113.0).abs() < 0.01);
    assert!((p["j"].as_f64().unwrap() - 180.0).abs() < 0.01);
}

#[test]
fn decompose_lists_classes_and_transients() {
    let v = json(&obo(&["decompose", &fixture()]));
    assert_eq!(v["transient"], serde_json::json!(["d", "e", "f", "g", "h"]));
    assert_eq!(
        v["classes"],
        serde_json::json!([["a", "b", "c"], ["i", "j", "k", "l"]])
    );
}

#[test]
fn min_class_budget_is_one_based() {
    let v = json(&obo(&["min-class-budget", "--class", "2", &fixture()]));
    assert!((v["total"].as_f64().unwrap() - 99.0).abs() < 1e-9);
    let out = obo(&["min-class-budget", "--class", "3", &fixture()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_csv_zero_budget() {
    let out = obo(&["sweep", "--budgets", "0", "--format", "csv", &fixture()]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "budget,supporters,total_spend\n0,0,0\n"
    );
}

#[test]
fn sweep_rejects_unsorted_budgets() {
    let out = obo(&["sweep", "--budgets", "10,5", &fixture()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_instance_exits_1_with_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"agents": ["u"], "edges": [{"from": "u", "to": "u", "w": 1}],
            "opinions": [1.2], "costs": [1], "threshold": 0.5, "budget": 0}"#,
    )
    .unwrap();
    let out = obo(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["violations"][0]["kind"], "OpinionOutOfRange");
}

#[test]
fn validate_accepts_fixture() {
    let v = json(&obo(&["validate", &fixture()]));
    assert_eq!(v["valid"], true);
}

#[test]
fn knapsack_mode_refuses_transients() {
    let out = obo(&["solve", "--mode", "knapsack", &fixture()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["sweep", "--budgets", "0,99,114,117,169,293,309", &fixture()];
    let first = obo(&args);
    assert!(first.status.success());
    for _ in 0..3 {
        assert_eq!(obo(&args).stdout, first.stdout);
    }
}

#[test]
fn simulated_plan_reproduces_supporters() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let out = obo(&[
        "solve",
        "--budget",
        "169",
        "--out",
        plan.to_str().unwrap(),
        &fixture(),
    ]);
    assert!(out.status.success());
    let solved: Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    let sim = json(&obo(&[
        "simulate",
        "--plan",
        plan.to_str().unwrap(),
        &fixture(),
    ]));
    assert_eq!(sim["supporters"], solved["supporters"]);
    assert_eq!(sim["supporter_count"], 7);
}

#[test]
fn analyze_reports_consensus() {
    let v = json(&obo(&["analyze", &fixture()]));
    let text = v.to_string();
    assert!(text.contains("0.410638297872"), "{text}");
}
