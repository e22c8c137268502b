mod common;

use obo::model::{self, confidence_matrix, LoadError, Violation};

fn two_agents(extra: &str) -> String {
    format!(
        r#"{{
        "agents": ["u", "v"],
        "edges": [{{"from": "u", "to": "u", "w": 1}}, {{"from": "u", "to": "v", "w": 1}},
                  {{"from": "v", "to": "v", "w": 3}}],
        "costs": [10, 20], "threshold": 0.5, "budget": 4{extra}
    }}"#
    )
}

#[test]
fn two_agent_matrix_is_row_normalized() {
    let inst = model::parse_instance(&two_agents(r#", "opinions": [0.1, 0.9]"#)).unwrap();
    let a = confidence_matrix(&inst);
    assert_eq!(a.get(0, 0), 0.5);
    assert_eq!(a.get(0, 1), 0.5);
    assert_eq!(a.get(1, 0), 0.0);
    assert_eq!(a.get(1, 1), 1.0);
    assert_eq!(a.step(&[0.1, 0.9]), vec![0.5, 0.9]);
}

#[test]
fn single_agent_weight_is_normalized_to_one() {
    let inst = model::parse_instance(
        r#"{"agents": ["z"], "edges": [{"from": "z", "to": "z", "w": 5}],
            "opinions": [0.3], "costs": [1], "threshold": 0.5, "budget": 0}"#,
    )
    .unwrap();
    assert_eq!(confidence_matrix(&inst).get(0, 0), 1.0);
}

#[test]
fn opinion_out_of_range_is_reported() {
    let err = model::parse_instance(&two_agents(r#", "opinions": [1.2, 0.9]"#)).unwrap_err();
    let LoadError::Invalid(v) = err else {
        panic!("{err}")
    };
    assert_eq!(
        v.0,
        vec![Violation::OpinionOutOfRange {
            agent: "u".into(),
            value: 1.2
        }]
    );
}

#[test]
fn missing_self_loop_is_reported() {
    let err = model::parse_instance(
        r#"{"agents": ["u", "v"],
            "edges": [{"from": "u", "to": "v", "w": 1}, {"from": "v", "to": "v", "w": 1}],
            "opinions": [0.1, 0.2], "costs": [1, 1], "threshold": 0.5, "budget": 0}"#,
    )
    .unwrap_err();
    let LoadError::Invalid(v) = err else {
        panic!("{err}")
    };
    assert_eq!(v.0, vec![Violation::NoSelfConfidence { agent: "u".into() }]);
}

#[test]
fn all_violations_are_collected() {
    let err = model::parse_instance(
        r#"{"agents": ["u"], "edges": [{"from": "u", "to": "u", "w": -1}],
            "opinions": [-0.5], "costs": [0], "threshold": 0, "budget": -3}"#,
    )
    .unwrap_err();
    let LoadError::Invalid(v) = err else {
        panic!("{err}")
    };
    assert_eq!(v.0.len(), 7, "{:?}", v.0);
}

#[test]
fn empty_agent_list_is_a_field_error() {
    let err = model::parse_instance(
        r#"{"agents": [], "edges": [], "opinions": [], "costs": [], "threshold": 0.5, "budget": 0}"#,
    )
    .unwrap_err();
    assert!(
        matches!(err, LoadError::Field { ref field, .. } if field == "agents"),
        "{err}"
    );
}

#[test]
fn duplicate_agent_is_a_field_error() {
    let err = model::parse_instance(
        r#"{"agents": ["u", "u"], "edges": [], "opinions": [0, 0], "costs": [1, 1],
            "threshold": 0.5, "budget": 0}"#,
    )
    .unwrap_err();
    assert!(
        matches!(err, LoadError::Field { ref field, .. } if field == "agents[1]"),
        "{err}"
    );
}

#[test]
fn unknown_edge_endpoint_is_a_field_error() {
    let err = model::parse_instance(
        r#"{"agents": ["u"], "edges": [{"from": "u", "to": "q", "w": 1}],
            "opinions": [0], "costs": [1], "threshold": 0.5, "budget": 0}"#,
    )
    .unwrap_err();
    assert!(
        matches!(err, LoadError::Field { ref field, .. } if field == "edges[0].to"),
        "{err}"
    );
}

#[test]
fn malformed_json_reports_position() {
    let err = model::parse_instance("{\n  \"agents\": [,]\n}").unwrap_err();
    let LoadError::Syntax { line, .. } = err else {
        panic!("{err}")
    };
    assert_eq!(line, 2);
}

#[test]
fn save_and_reload_round_trip() {
    let inst = common::worked_instance();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.json");
    model::save_instance(&inst, &path).unwrap();
    assert_eq!(model::load_instance(&path).unwrap(), inst);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = model::load_instance("/nonexistent/instance.json").unwrap_err();
    assert!(matches!(err, LoadError::Io { .. }));
}

#[test]
fn negative_budget_override_is_rejected() {
    let inst = common::worked_instance();
    assert!(inst.with_budget(-1.0).is_err());
    assert_eq!(inst.with_budget(5.0).unwrap().budget(), 5.0);
}
