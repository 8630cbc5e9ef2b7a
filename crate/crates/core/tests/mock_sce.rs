mod common;

use std::time::Duration;

use common::{chosen_rows, loop_script, Visualizer};
use plotbridge::bridge::{ServerConfig, TestServer};
use plotbridge::data::RowIndexSet;
use plotbridge::mock_sce::{canonicalize, parse_script, MockSce};
use serde_json::{json, Value};

async fn server() -> TestServer {
    TestServer::start(ServerConfig::default()).await.unwrap()
}

fn steps(v: Value) -> Vec<plotbridge::mock_sce::Step> {
    parse_script(&v.to_string()).unwrap()
}

#[tokio::test]
async fn happy_path_records_every_message() {
    let srv = server().await;
    let mut mock = MockSce::new(&srv.url(), ".");
    let script = steps(json!([
        {"op": "connect"},
        {"op": "store", "name": "d", "data": {"name": "d", "columns": [{"name": "x", "type": "quantitative"}], "rows": [[1.5], [2.5]]}},
        {"op": "figure.add", "source": "d", "kind": "parcoords"},
        {"op": "disconnect"}
    ]));
    mock.run(&script).await.unwrap();
    let s = &mock.session;
    assert_eq!(s.steps.len(), 4);
    assert!(s.steps.iter().all(|r| r.error.is_none()));
    // One request and one response per step.
    assert_eq!(s.log.len(), 8);
    assert!(s.log[0].body.contains("\"op\":\"connect\""));
    assert!(s.log[5].body.contains("figureId"));
    assert!(s.variables.contains_key("d"));
}

#[tokio::test]
async fn eval_binds_integer_results() {
    let srv = server().await;
    let mut mock = MockSce::new(&srv.url(), ".");
    mock.run(&steps(json!([
        {"op": "connect"},
        {"op": "eval", "expr": "2+2", "name": "four"},
        {"op": "fetch", "name": "four"}
    ])))
    .await
    .unwrap();
    let t = mock.session.transcript();
    assert_eq!(t["variables"]["four"], json!({"type": "number", "value": 4.0}));
    let err = mock.run(&steps(json!([{"op": "eval", "expr": "2/2"}]))).await.unwrap_err();
    assert!(err.message.starts_with("unsupported"), "{err}");
}

#[tokio::test]
async fn failures_carry_the_step_index() {
    let srv = server().await;
    let mut mock = MockSce::new(&srv.url(), ".");
    let err = mock
        .run(&steps(json!([
            {"op": "connect"},
            {"op": "store", "name": "d", "random": {"rows": 5, "cols": 2}},
            {"op": "await_selection", "timeoutMs": 100}
        ])))
        .await
        .unwrap_err();
    assert_eq!((err.step, err.op.as_str()), (2, "await_selection"));
    assert!(err.message.contains("timed out"), "{err}");
    assert_eq!(mock.session.steps.len(), 3);

    let err = MockSce::new(&srv.url(), ".")
        .run(&steps(json!([{"op": "fetch", "name": "x"}])))
        .await
        .unwrap_err();
    assert_eq!(err.step, 0);

    let err = MockSce::new("http://127.0.0.1:1", ".")
        .run(&steps(json!([{"op": "connect"}])))
        .await
        .unwrap_err();
    assert_eq!(err.step, 0);
}

#[tokio::test]
async fn csv_paths_resolve_against_the_script_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.csv"), "a,b\n1,2\n3,4\n").unwrap();
    let script = dir.path().join("s.json");
    std::fs::write(
        &script,
        json!([{"op": "connect"}, {"op": "store", "name": "t", "csv": "t.csv"}, {"op": "fetch", "name": "t"}]).to_string(),
    )
    .unwrap();
    let srv = server().await;
    let (session, failure) = plotbridge::mock_sce::run_script_file(&srv.url(), &script).await.unwrap();
    assert!(failure.is_none(), "{failure:?}");
    assert_eq!(session.transcript()["variables"]["t"], json!({"type": "datasource", "rows": 2, "columns": 2}));
}

async fn full_loop(rows: usize) -> (Value, RowIndexSet) {
    let srv = server().await;
    let mut ui = Visualizer::connect(&srv.url()).await;
    let script = parse_script(&loop_script(rows)).unwrap();
    let url = srv.url();
    let mock = tokio::spawn(async move {
        let mut mock = MockSce::new(&url, ".");
        let result = mock.run(&script).await;
        (mock, result)
    });
    let fig = ui.expect("figure.add").await;
    ui.ack(&fig).await;
    let out = ui
        .command("selection.set", json!({"figure": fig.payload["figureId"], "rows": chosen_rows()}))
        .await;
    assert_eq!(out["status"], "ok", "{out}");
    let (mock, result) = tokio::time::timeout(Duration::from_secs(20), mock).await.unwrap().unwrap();
    result.unwrap();
    let rows = mock.session.rows("d_sel").cloned().unwrap();
    (mock.session.transcript(), rows)
}

#[tokio::test]
async fn selection_made_in_the_view_reaches_the_mock() {
    let (_, rows) = full_loop(1000).await;
    assert_eq!(rows, RowIndexSet::from_unsorted(chosen_rows()));
    assert_eq!(rows.len(), 37);
}

#[tokio::test]
async fn replay_is_identical_modulo_ids() {
    let (a, _) = full_loop(1000).await;
    let (b, _) = full_loop(1000).await;
    assert_eq!(canonicalize(&a), canonicalize(&b));
    let text = serde_json::to_string(&canonicalize(&a)).unwrap();
    assert!(text.contains("<dvpId:0>"));
}
