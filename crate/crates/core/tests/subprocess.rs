use std::process::Command;

use qtune::cost_units::default_vector;
use qtune::exec::{execute, ExecutionBackend, ExecutionRequest, SubprocessBackend};
use qtune::planner::{QuerySpec, QueryTable, TableSpec};
use qtune::Error;

fn one_table_query() -> QuerySpec {
    QuerySpec {
        id: "q1".into(),
        tables: vec![QueryTable {
            table: TableSpec {
                name: "A".into(),
                rows: 100,
                pages: 10,
                has_index: false,
            },
            filter_sel: 1.0,
        }],
        joins: vec![],
    }
}

fn engine(script: &str) -> SubprocessBackend {
    SubprocessBackend::spawn(Command::new("sh").arg("-c").arg(script)).unwrap()
}

const FIXED_800MS: &str = r#"while read line; do echo '{"plan_fingerprint":"Scan(seq,A)","exec_ms":800.0,"timed_out":false}'; done"#;

#[test]
fn full_run_and_request_shape() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("requests.jsonl");
    let script = format!(
        r#"while read line; do echo "$line" >> '{}'; echo '{{"plan_fingerprint":"Scan(seq,A)","exec_ms":800.0,"timed_out":false}}'; done"#,
        log.display()
    );
    let mut backend = engine(&script);
    let q = one_table_query();
    let req = ExecutionRequest {
        query: &q,
        units: default_vector(),
        early_stop_threshold: Some(2.5),
    };
    let r = execute(&req, &mut backend).unwrap();
    assert_eq!(r.plan_fingerprint, "Scan(seq,A)");
    assert_eq!(r.observed_time, 0.8);
    assert_eq!(r.charged_time, 0.8);
    assert!(!r.stopped_early);
    assert_eq!(backend.explain(&q, &default_vector()).unwrap(), None);
    drop(backend);

    let sent: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(&log).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(sent["query_id"], "q1");
    assert_eq!(sent["timeout_ms"], 2500);
    assert_eq!(sent["cost_units"]["random_page_cost"], 4.0);
}

#[test]
fn slow_or_timed_out_runs_are_stopped_at_threshold() {
    let mut backend = engine(FIXED_800MS);
    let q = one_table_query();
    let req = ExecutionRequest {
        query: &q,
        units: default_vector(),
        early_stop_threshold: Some(0.5),
    };
    let r = execute(&req, &mut backend).unwrap();
    assert!(r.stopped_early);
    assert_eq!(r.charged_time, 0.5);
    assert_eq!(r.observed_time, 0.5);

    let mut backend = engine(
        r#"while read line; do echo '{"plan_fingerprint":"Scan(seq,A)","exec_ms":100.0,"timed_out":true}'; done"#,
    );
    let r = execute(&req, &mut backend).unwrap();
    assert!(r.stopped_early);
    assert_eq!(r.charged_time, 0.5);
}

#[test]
fn malformed_line_is_backend_error() {
    let mut backend = engine("while read line; do echo 'not json'; done");
    let q = one_table_query();
    let req = ExecutionRequest {
        query: &q,
        units: default_vector(),
        early_stop_threshold: None,
    };
    let err = execute(&req, &mut backend).unwrap_err();
    assert!(matches!(err, Error::Backend(_)), "{err}");
    assert!(!err.is_validation());
}

#[test]
fn child_exit_is_backend_error() {
    let mut backend = engine("exit 3");
    let q = one_table_query();
    let req = ExecutionRequest {
        query: &q,
        units: default_vector(),
        early_stop_threshold: None,
    };
    let err = execute(&req, &mut backend).unwrap_err();
    assert!(matches!(err, Error::Backend(_)), "{err}");
}

#[test]
fn negative_exec_time_is_rejected() {
    let mut backend = engine(
        r#"while read line; do echo '{"plan_fingerprint":"Scan(seq,A)","exec_ms":-1.0,"timed_out":false}'; done"#,
    );
    let q = one_table_query();
    let req = ExecutionRequest {
        query: &q,
        units: default_vector(),
        early_stop_threshold: None,
    };
    assert!(matches!(execute(&req, &mut backend), Err(Error::Backend(_))));
}

#[test]
fn missing_engine_binary_fails_to_spawn() {
    let err = SubprocessBackend::spawn(&mut Command::new("/nonexistent/engine")).err().unwrap();
    assert!(matches!(err, Error::Backend(_)));
}
