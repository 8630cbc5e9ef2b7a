//! A scripted stand-in for a computing environment that drives the bridge
//! protocol end to end and records what went over the wire.

mod sse;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bridge::wire;
use crate::bridge::{
    correlation::DEFAULT_TIMEOUT, CommandMessage, DvpId, EvalOp, NewDVTIdMessage, ReplyStatus, Response, SCEEvalMessage,
    SSEReplyMessage, Variable, COMMAND_PATH, EVAL_PATH, SSE_REPLY_PATH,
};
use crate::data::{load_csv, CsvOptions, DataSource, RowIndexSet};

pub use sse::{take_frames, EventStream};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "op")]
pub enum Step {
    #[serde(rename = "connect")]
    Connect,
    /// Exactly one of `csv`, `data`, `value` and `random` is given.
    #[serde(rename = "store", rename_all = "camelCase")]
    Store {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        data: Option<Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random: Option<RandomSpec>,
    },
    /// Remaining fields are passed through as the command payload.
    #[serde(rename = "figure.add")]
    FigureAdd {
        #[serde(flatten)]
        spec: Map<String, Value>,
    },
    #[serde(rename = "await_selection", rename_all = "camelCase")]
    AwaitSelection {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variable: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        timeout_ms: Option<u64>,
    },
    #[serde(rename = "fetch")]
    Fetch { name: String },
    #[serde(rename = "eval")]
    Eval {
        expr: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    #[serde(rename = "disconnect")]
    Disconnect,
}

impl Step {
    pub fn op(&self) -> &'static str {
        match self {
            Step::Connect => "connect",
            Step::Store { .. } => "store",
            Step::FigureAdd { .. } => "figure.add",
            Step::AwaitSelection { .. } => "await_selection",
            Step::Fetch { .. } => "fetch",
            Step::Eval { .. } => "eval",
            Step::Disconnect => "disconnect",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScriptDoc {
    Wrapped { steps: Vec<Step> },
    Bare(Vec<Step>),
}

/// Parses a step script: either `{"steps": [...]}` or a bare array.
pub fn parse_script(text: &str) -> Result<Vec<Step>, String> {
    // Parsed in two passes so a bad step reports its own error rather than
    // the untagged-enum summary.
    let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let steps = match &doc {
        Value::Array(_) => doc.clone(),
        Value::Object(m) => m.get("steps").cloned().ok_or("script object needs a \"steps\" array")?,
        _ => return Err("script must be an array of steps or {\"steps\": [...]}".into()),
    };
    if let Value::Array(items) = &steps {
        for (k, item) in items.iter().enumerate() {
            serde_json::from_value::<Step>(item.clone()).map_err(|e| format!("step {k}: {e}"))?;
        }
    }
    match serde_json::from_value::<ScriptDoc>(doc).map_err(|e| e.to_string())? {
        ScriptDoc::Wrapped { steps } | ScriptDoc::Bare(steps) => Ok(steps),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Send,
    Receive,
}

/// One wire message, stored as the exact text sent or received.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub direction: Direction,
    pub endpoint: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub op: String,
    pub status: ReplyStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("step {step} ({op}) failed: {message}")]
pub struct MockError {
    pub step: usize,
    pub op: String,
    pub message: String,
}

/// State of one mock session; the log only ever grows.
#[derive(Debug, Default)]
pub struct MockSession {
    pub dvp_id: Option<DvpId>,
    pub variables: BTreeMap<String, Variable>,
    pub log: Vec<LogEntry>,
    pub steps: Vec<StepRecord>,
}

impl MockSession {
    pub fn rows(&self, name: &str) -> Option<&RowIndexSet> {
        match self.variables.get(name)? {
            Variable::Rows(r) => Some(r),
            _ => None,
        }
    }

    /// Serializable transcript; variables are summarized by type.
    pub fn transcript(&self) -> Value {
        let vars: Map<String, Value> = self
            .variables
            .iter()
            .map(|(k, v)| {
                let summary = match v {
                    Variable::Data(d) => json!({"type": "datasource", "rows": d.n_rows(), "columns": d.n_cols()}),
                    Variable::Rows(r) => json!({"type": "rows", "value": r}),
                    Variable::Number(n) => json!({"type": "number", "value": n}),
                    Variable::Text(t) => json!({"type": "text", "value": t}),
                };
                (k.clone(), summary)
            })
            .collect();
        json!({
            "dvpId": self.dvp_id,
            "steps": self.steps,
            "variables": vars,
            "log": self.log,
        })
    }
}

/// Fields holding server-assigned ids.
const ID_FIELDS: &[&str] = &["dvpId", "requestId", "requestIds", "figureId", "groupId", "targets", "figures"];

/// Replaces server-assigned ids with placeholders numbered by first
/// appearance per field, and does the same inside logged message bodies.
pub fn canonicalize(transcript: &Value) -> Value {
    let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
    canon(transcript, None, &mut seen)
}

fn canon(v: &Value, field: Option<&str>, seen: &mut BTreeMap<(String, String), usize>) -> Value {
    match (v, field) {
        (Value::Number(n), Some(f)) if ID_FIELDS.contains(&f) => {
            let next = seen.iter().filter(|((k, _), _)| k == f).count();
            let k = *seen.entry((f.to_string(), n.to_string())).or_insert(next);
            Value::String(format!("<{f}:{k}>"))
        }
        (Value::Array(items), f) => Value::Array(items.iter().map(|i| canon(i, f, seen)).collect()),
        (Value::Object(m), _) => Value::Object(
            m.iter()
                .map(|(k, v)| {
                    let v = match (k.as_str(), v) {
                        ("body", Value::String(text)) => match serde_json::from_str::<Value>(text) {
                            Ok(inner) => Value::String(canon(&inner, None, seen).to_string()),
                            Err(_) => v.clone(),
                        },
                        _ => canon(v, Some(k), seen),
                    };
                    (k.clone(), v)
                })
                .collect(),
        ),
        (Value::String(s), _) if s.starts_with('?') => Value::String(canon_query(s, seen)),
        _ => v.clone(),
    }
}

fn canon_query(query: &str, seen: &mut BTreeMap<(String, String), usize>) -> String {
    let parts: Vec<String> = query[1..]
        .split('&')
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) if ID_FIELDS.contains(&k) => match v.parse::<u64>() {
                Ok(n) => format!("{k}={}", canon(&Value::from(n), Some(k), seen).as_str().unwrap_or_default()),
                Err(_) => kv.to_string(),
            },
            _ => kv.to_string(),
        })
        .collect();
    format!("?{}", parts.join("&"))
}

/// A deterministic quantitative table with columns `c1..c{cols}`.
pub fn random_source(name: &str, spec: &RandomSpec) -> DataSource {
    let mut rng = rand::rngs::StdRng::seed_from_u64(spec.seed);
    let names: Vec<String> = (1..=spec.cols).map(|i| format!("c{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..spec.rows)
        .map(|_| (0..spec.cols).map(|_| (rng.gen_range(0.0..1000.0f64) * 1000.0).round() / 1000.0).collect())
        .collect();
    DataSource::from_rows(name, &refs, &rows).expect("generated table is rectangular")
}

pub struct MockSce {
    http: reqwest::Client,
    base: String,
    base_dir: PathBuf,
    events: Option<EventStream>,
    pub session: MockSession,
}

impl MockSce {
    /// `base_dir` resolves relative CSV paths in store steps.
    pub fn new(server: &str, base_dir: impl Into<PathBuf>) -> MockSce {
        MockSce {
            http: reqwest::Client::builder()
                .connect_timeout(Duration::from_secs(5))
                .build()
                .expect("http client"),
            base: server.trim_end_matches('/').to_string(),
            base_dir: base_dir.into(),
            events: None,
            session: MockSession::default(),
        }
    }

    async fn post(&mut self, path: &str, body: String) -> Result<Value, String> {
        self.session.log.push(LogEntry {
            direction: Direction::Send,
            endpoint: path.to_string(),
            body: body.clone(),
        });
        let resp = self
            .http
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(body)
            .send()
            .await
            .map_err(|e| format!("request to {path} failed: {e}"))?;
        let text = resp.text().await.map_err(|e| e.to_string())?;
        self.session.log.push(LogEntry {
            direction: Direction::Receive,
            endpoint: path.to_string(),
            body: text.clone(),
        });
        let r: Response = serde_json::from_str(&text).map_err(|e| format!("bad response from {path}: {e}"))?;
        match r.error_payload() {
            Some(e) => Err(format!("{}: {}", serde_json::to_value(e.kind).unwrap_or_default().as_str().unwrap_or("error"), e.message)),
            None => Ok(r.payload),
        }
    }

    async fn eval_op(&mut self, op: EvalOp, name: Option<String>, payload: Option<Value>) -> Result<Value, String> {
        let msg = SCEEvalMessage {
            dvp_id: self.session.dvp_id,
            op,
            name,
            payload,
        };
        self.post(EVAL_PATH, serde_json::to_string(&msg).expect("serializable")).await
    }

    fn dvp(&self) -> Result<DvpId, String> {
        self.session.dvp_id.ok_or_else(|| "not connected".to_string())
    }

    async fn run_step(&mut self, step: &Step) -> Result<(), String> {
        match step {
            Step::Connect => {
                let hello: NewDVTIdMessage =
                    serde_json::from_value(self.eval_op(EvalOp::Connect, None, None).await?).map_err(|e| e.to_string())?;
                self.session.dvp_id = Some(hello.dvp_id);
                self.events = Some(EventStream::open(&self.http, &self.base, hello.dvp_id).await?);
                Ok(())
            }
            Step::Store { name, csv, data, value, random } => {
                let given = [csv.is_some(), data.is_some(), value.is_some(), random.is_some()];
                if given.iter().filter(|g| **g).count() != 1 {
                    return Err("store needs exactly one of csv, data, value, random".into());
                }
                let payload = if let Some(path) = csv {
                    let path = if path.is_relative() { self.base_dir.join(path) } else { path.clone() };
                    let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                    let opts = CsvOptions {
                        name: name.clone(),
                        ..CsvOptions::default()
                    };
                    let source = load_csv(&bytes, &opts).map_err(|e| e.to_string())?;
                    wire::to_json_value(&source)
                } else if let Some(spec) = random {
                    wire::to_json_value(&random_source(name, spec))
                } else {
                    data.clone().or_else(|| value.clone()).expect("checked above")
                };
                let local = Variable::from_payload(&payload).map_err(|e| e.message)?;
                self.eval_op(EvalOp::Store, Some(name.clone()), Some(payload)).await?;
                self.session.variables.insert(name.clone(), local);
                Ok(())
            }
            Step::FigureAdd { spec } => {
                let msg = CommandMessage {
                    dvp_id: self.dvp()?,
                    command: "figure.add".into(),
                    payload: Value::Object(spec.clone()),
                };
                self.post(COMMAND_PATH, serde_json::to_string(&msg).expect("serializable")).await?;
                Ok(())
            }
            Step::AwaitSelection { variable, timeout_ms } => {
                let timeout = timeout_ms.map(Duration::from_millis).unwrap_or(DEFAULT_TIMEOUT);
                self.await_selection(variable.as_deref(), timeout).await
            }
            Step::Fetch { name } => {
                let payload = self.eval_op(EvalOp::Fetch, Some(name.clone()), None).await?;
                let value = match payload["type"].as_str() {
                    Some("rows") => Variable::Rows(serde_json::from_value(payload["value"].clone()).map_err(|e| e.to_string())?),
                    Some("datasource") => Variable::Data(Arc::new(wire::from_json_value(&payload["value"]).map_err(|e| e.to_string())?)),
                    _ => Variable::from_payload(&payload["value"]).map_err(|e| e.message)?,
                };
                self.session.variables.insert(name.clone(), value);
                Ok(())
            }
            Step::Eval { expr, name } => {
                let result = self.eval_op(EvalOp::Eval, name.clone(), Some(Value::String(expr.clone()))).await?;
                if let Some(name) = name {
                    let v = Variable::from_payload(&result).map_err(|e| e.message)?;
                    self.session.variables.insert(name.clone(), v);
                }
                self.session.variables.insert("ans".into(), Variable::from_payload(&result).map_err(|e| e.message)?);
                Ok(())
            }
            Step::Disconnect => {
                self.eval_op(EvalOp::Disconnect, None, None).await?;
                self.events = None;
                Ok(())
            }
        }
    }

    async fn await_selection(&mut self, variable: Option<&str>, timeout: Duration) -> Result<(), String> {
        let dvp_id = self.dvp()?;
        let deadline = tokio::time::Instant::now() + timeout;
        loop {
            let events = self.events.as_mut().ok_or("no event stream open")?;
            let left = deadline.saturating_duration_since(tokio::time::Instant::now());
            let msg = match events.next(left).await {
                Some(Ok(msg)) => msg,
                Some(Err(e)) => return Err(e),
                None => return Err(format!("timed out after {} ms waiting for a selection", timeout.as_millis())),
            };
            self.session.log.push(LogEntry {
                direction: Direction::Receive,
                endpoint: crate::bridge::SSE_PATH.into(),
                body: serde_json::to_string(&msg).expect("serializable"),
            });
            let ack = SSEReplyMessage {
                request_id: msg.request_id,
                dvp_id,
                status: ReplyStatus::Ok,
                payload: json!({}),
            };
            self.post(SSE_REPLY_PATH, serde_json::to_string(&ack).expect("serializable")).await?;
            if msg.command != "selection.created" {
                continue;
            }
            let name = msg.payload["variable"].as_str().unwrap_or_default().to_string();
            if variable.is_some_and(|v| v != name) {
                continue;
            }
            let rows: RowIndexSet = serde_json::from_value(msg.payload["rows"].clone()).map_err(|e| e.to_string())?;
            self.session.variables.insert(name, Variable::Rows(rows));
            return Ok(());
        }
    }

    /// Runs every step in order and stops at the first failure.
    pub async fn run(&mut self, steps: &[Step]) -> Result<(), MockError> {
        for (index, step) in steps.iter().enumerate() {
            let result = self.run_step(step).await;
            self.session.steps.push(StepRecord {
                index,
                op: step.op().into(),
                status: if result.is_ok() { ReplyStatus::Ok } else { ReplyStatus::Error },
                error: result.as_ref().err().cloned(),
            });
            if let Err(message) = result {
                return Err(MockError {
                    step: index,
                    op: step.op().into(),
                    message,
                });
            }
        }
        Ok(())
    }
}

/// Runs a script file against `server`; relative CSV paths resolve against
/// the script's directory.
pub async fn run_script_file(server: &str, path: &Path) -> Result<(MockSession, Option<MockError>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let steps = parse_script(&text)?;
    let mut mock = MockSce::new(server, path.parent().unwrap_or(Path::new(".")));
    let result = mock.run(&steps).await;
    Ok((mock.session, result.err()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_forms() {
        let bare = parse_script(r#"[{"op":"connect"},{"op":"store","name":"d","random":{"rows":3,"cols":2}},{"op":"disconnect"}]"#).unwrap();
        assert_eq!(bare.len(), 3);
        let wrapped = parse_script(r#"{"steps":[{"op":"figure.add","source":"d","kind":"parcoords"},{"op":"await_selection","timeoutMs":5}]}"#).unwrap();
        match &wrapped[0] {
            Step::FigureAdd { spec } => assert_eq!(spec["source"], "d"),
            s => panic!("{s:?}"),
        }
        assert_eq!(wrapped[1], Step::AwaitSelection { variable: None, timeout_ms: Some(5) });
        let err = parse_script(r#"[{"op":"connect"},{"op":"teleport"}]"#).unwrap_err();
        assert!(err.starts_with("step 1"), "{err}");
        assert!(parse_script("7").is_err());
    }

    #[test]
    fn random_source_is_seeded() {
        let spec = RandomSpec { rows: 10, cols: 3, seed: 4 };
        assert_eq!(random_source("a", &spec), random_source("a", &spec));
        assert_ne!(random_source("a", &spec), random_source("a", &RandomSpec { seed: 5, ..spec.clone() }));
        assert_eq!(random_source("a", &spec).n_cols(), 3);
    }

    #[test]
    fn canonical_ids() {
        let t = json!({
            "dvpId": 7,
            "log": [
                {"direction": "send", "endpoint": "/sce", "body": "{\"dvpId\":7,\"op\":\"fetch\"}"},
                {"direction": "receive", "endpoint": "/sse", "body": "{\"requestId\":12,\"command\":\"x\",\"payload\":{\"figureId\":3}}"},
                {"direction": "send", "endpoint": "/x", "body": "not json"}
            ],
            "requestIds": [12, 13]
        });
        let c = canonicalize(&t);
        assert_eq!(c["dvpId"], "<dvpId:0>");
        assert_eq!(c["log"][0]["body"], r#"{"dvpId":"<dvpId:0>","op":"fetch"}"#);
        assert_eq!(c["log"][1]["body"], r#"{"command":"x","payload":{"figureId":"<figureId:0>"},"requestId":"<requestId:0>"}"#);
        assert_eq!(c["log"][2]["body"], "not json");
        assert_eq!(c["requestIds"], json!(["<requestIds:0>", "<requestIds:1>"]));
        // Different raw ids in the same pattern canonicalize identically.
        let shifted = serde_json::to_string(&t).unwrap().replace('7', "9").replace("12", "40");
        assert_eq!(canonicalize(&serde_json::from_str(&shifted).unwrap()), c);
    }
}
