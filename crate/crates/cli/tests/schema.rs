mod common;

use common::*;
use jsonschema::JSONSchema;
use serde_json::Value;

fn schema(name: &str) -> JSONSchema {
    let path = format!("{}/schemas/{name}", env!("CARGO_MANIFEST_DIR"));
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&raw).unwrap()
}

fn assert_valid(schema: &JSONSchema, text: &str, context: &str) {
    let doc: Value =
        serde_json::from_str(text).unwrap_or_else(|e| panic!("{context}: {e}\n{text}"));
    let msgs: Vec<String> = match schema.validate(&doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect(),
    };
    assert!(msgs.is_empty(), "{context}: {msgs:?}\n{text}");
}

#[test]
fn session_commands_match_report_schema() {
    let report = schema("report.schema.json");
    let dir = tempfile::tempdir().unwrap();
    for (label, text) in [("kp2", KP2), ("mixed", MIXED), ("savin", SAVIN)] {
        let file = session_file(dir.path(), label, text);
        let f = file.to_str().unwrap();
        for cmd in ["lambda", "wf", "generic", "whdim", "bvcheck"] {
            let out = covseg(&[cmd, f, "--format", "json"]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{label} {cmd}: {}",
                stderr(&out)
            );
            assert_valid(&report, &stdout(&out), &format!("{label} {cmd}"));
        }
    }
    let file = session_file(dir.path(), "kp2", KP2);
    let f = file.to_str().unwrap();
    for args in [
        vec!["derive", f, "--k", "1", "--format", "json"],
        vec!["derive", f, "--k", "3", "--kind", "L", "--format", "json"],
        vec!["semiwh", f, "--lambda", "1,2", "--format", "json"],
    ] {
        let out = covseg(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_valid(&report, &stdout(&out), &format!("{args:?}"));
    }
}

#[test]
fn enumerate_matches_schema() {
    let out = covseg(&[
        "enumerate",
        "--max-size",
        "4",
        "--covers",
        "KP:n<=3,a in -1..1;S:n<=4",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_valid(&schema("enumerate.schema.json"), &stdout(&out), "enumerate");
}

#[test]
fn selftest_matches_schema() {
    let out = covseg(&["selftest", "--format", "json"]);
    assert_valid(&schema("selftest.schema.json"), &stdout(&out), "selftest");
}

#[test]
fn schemas_reject_malformed_reports() {
    let report = schema("report.schema.json");
    let bad: Value = serde_json::json!({
        "command": "wf",
        "cover": {"family": "KP", "n": 2, "a": 0},
        "ok": true,
        "results": [{"name": "M1", "multisegment": "[0,2]_rho1", "wf": [0]}]
    });
    assert!(!report.is_valid(&bad));
}
