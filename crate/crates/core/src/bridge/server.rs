//! HTTP endpoints.

use std::convert::Infallible;
use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response as HttpResponse};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;

use super::backend::{BackendError, MockArithmetic, SceBackend};
use super::correlation::{CorrelationError, ReplyTable, DEFAULT_HOLD, DEFAULT_TIMEOUT};
use super::hub::{Hub, HubError, Role};
use super::kernel::{figure_wait, Kernel, Variable};
use super::messages::*;
use crate::data::DataSource;

pub struct ServerConfig {
    pub hold: Duration,
    pub default_timeout: Duration,
    pub backend: Arc<dyn SceBackend>,
    /// Directory served at `/` when present.
    pub static_dir: Option<PathBuf>,
    /// Variables bound before the first client connects.
    pub preload: Vec<(String, DataSource)>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            hold: DEFAULT_HOLD,
            default_timeout: DEFAULT_TIMEOUT,
            backend: Arc::new(MockArithmetic),
            static_dir: None,
            preload: Vec::new(),
        }
    }
}

/// Shared server state.
pub struct Bridge {
    pub hub: Arc<Hub>,
    pub replies: ReplyTable,
    pub kernel: Kernel,
    backend: Arc<dyn SceBackend>,
    default_timeout: Duration,
}

impl Bridge {
    /// Must be called inside a tokio runtime.
    pub async fn new(config: &ServerConfig) -> Arc<Bridge> {
        let hub = Arc::new(Hub::new());
        let kernel = Kernel::spawn(hub.clone());
        for (name, data) in &config.preload {
            let _ = kernel.store(name, Variable::Data(Arc::new(data.clone()))).await;
        }
        Arc::new(Bridge {
            hub,
            replies: ReplyTable::new(config.hold),
            kernel,
            backend: config.backend.clone(),
            default_timeout: config.default_timeout,
        })
    }
}

fn status_for(kind: ErrorKind) -> StatusCode {
    match kind {
        ErrorKind::Schema => StatusCode::BAD_REQUEST,
        ErrorKind::Type | ErrorKind::Unsupported | ErrorKind::Query => StatusCode::UNPROCESSABLE_ENTITY,
        ErrorKind::Protocol => StatusCode::FORBIDDEN,
        ErrorKind::Unbound => StatusCode::NOT_FOUND,
        ErrorKind::Duplicate => StatusCode::CONFLICT,
        ErrorKind::Timeout => StatusCode::GATEWAY_TIMEOUT,
        ErrorKind::Delivery => StatusCode::GONE,
        ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn reply(result: Result<Value, ErrorPayload>) -> HttpResponse {
    match result {
        Ok(v) => (StatusCode::OK, Json(Response::ok(v))).into_response(),
        Err(e) => (status_for(e.kind), Json(Response::from_error(e))).into_response(),
    }
}

fn err(kind: ErrorKind, message: impl Into<String>) -> ErrorPayload {
    ErrorPayload {
        kind,
        message: message.into(),
        path: None,
    }
}

fn schema_field(field: &str, message: impl Into<String>) -> ErrorPayload {
    ErrorPayload {
        kind: ErrorKind::Schema,
        message: message.into(),
        path: Some(field.into()),
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ErrorPayload> {
    let mut de = serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| ErrorPayload {
        kind: ErrorKind::Schema,
        message: e.inner().to_string(),
        path: Some(e.path().to_string()),
    })
}

fn hub_error(e: HubError) -> ErrorPayload {
    match e {
        HubError::Delivery { .. } => err(ErrorKind::Delivery, e.to_string()),
        _ => err(ErrorKind::Protocol, e.to_string()),
    }
}

pub fn router(bridge: Arc<Bridge>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route(WELCOME_PATH, get(welcome))
        .route(EVAL_PATH, post(eval))
        .route(SSE_PATH, get(sse))
        .route(SSE_REPLY_PATH, post(sse_reply))
        .route("/sse-reply/wait", get(wait_reply))
        .route(COMMAND_PATH, post(command))
        .with_state(bridge);
    match static_dir {
        Some(dir) if dir.is_dir() => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        _ => api,
    }
}

async fn welcome(State(b): State<Arc<Bridge>>) -> Json<NewDVTIdMessage> {
    Json(NewDVTIdMessage::new(b.hub.handshake(Role::Visualizer)))
}

async fn eval(State(b): State<Arc<Bridge>>, body: Bytes) -> HttpResponse {
    reply(handle_eval(&b, &body).await)
}

async fn handle_eval(b: &Bridge, body: &[u8]) -> Result<Value, ErrorPayload> {
    let msg: SCEEvalMessage = parse_body(body)?;
    if msg.op == EvalOp::Connect {
        return match msg.dvp_id {
            None => Ok(serde_json::to_value(NewDVTIdMessage::new(b.hub.handshake(Role::Sce))).expect("serializable")),
            Some(id) => {
                b.hub.reconnect(id, Role::Sce).map_err(hub_error)?;
                Ok(serde_json::to_value(NewDVTIdMessage::new(id)).expect("serializable"))
            }
        };
    }
    let id = msg.dvp_id.ok_or_else(|| schema_field("dvpId", format!("missing field `dvpId` for op {:?}", msg.op)))?;
    b.hub.check_open(id).map_err(hub_error)?;
    match msg.op {
        EvalOp::Connect => unreachable!("handled above"),
        EvalOp::Disconnect => {
            b.hub.disconnect(id).map_err(hub_error)?;
            Ok(json!({"dvpId": id}))
        }
        EvalOp::Store => {
            let name = msg.name.ok_or_else(|| schema_field("name", "missing field `name` for op store"))?;
            let payload = msg.payload.ok_or_else(|| schema_field("payload", "missing field `payload` for op store"))?;
            let value = Variable::from_payload(&payload)?;
            b.kernel.store(&name, value).await
        }
        EvalOp::Fetch => {
            let name = msg.name.ok_or_else(|| schema_field("name", "missing field `name` for op fetch"))?;
            b.kernel.fetch(&name).await
        }
        EvalOp::Eval => {
            let expr = match msg.payload {
                Some(Value::String(s)) => s,
                Some(_) => return Err(err(ErrorKind::Type, "eval payload must be an expression string")),
                None => return Err(schema_field("payload", "missing field `payload` for op eval")),
            };
            let value = b.backend.eval(&expr).map_err(|e| match e {
                BackendError::Unsupported(_) => err(ErrorKind::Unsupported, e.to_string()),
                BackendError::Overflow(_) => err(ErrorKind::Type, e.to_string()),
            })?;
            if let Some(name) = msg.name {
                b.kernel.store(&name, Variable::from_payload(&value)?).await?;
            }
            Ok(value)
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SseQuery {
    dvp_id: DvpId,
}

async fn sse(
    State(b): State<Arc<Bridge>>,
    query: Result<Query<SseQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, HttpResponse> {
    let Query(q) = query.map_err(|e| reply(Err(schema_field("dvpId", e.body_text()))))?;
    let rx = b.hub.open_stream(q.dvp_id).map_err(|e| reply(Err(hub_error(e))))?;
    tracing::debug!(dvp_id = q.dvp_id, "event stream opened");
    let opened = futures::stream::once(async { Ok(Event::default().comment("open")) });
    let events = futures::stream::unfold(rx, |mut rx| async move {
        let msg = rx.recv().await?;
        let data = serde_json::to_string(&msg).expect("serializable");
        Some((Ok(Event::default().data(data)), rx))
    });
    Ok(Sse::new(futures::StreamExt::chain(opened, events)).keep_alive(KeepAlive::default()))
}

async fn sse_reply(State(b): State<Arc<Bridge>>, body: Bytes) -> HttpResponse {
    let result = parse_body::<SSEReplyMessage>(&body).and_then(|msg| {
        let id = msg.request_id;
        b.replies.post(msg).map_err(|e| err(ErrorKind::Duplicate, format!("duplicate: {e}")))?;
        Ok(json!({"requestId": id}))
    });
    reply(result)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct WaitQuery {
    request_id: RequestId,
    dvp_id: DvpId,
    timeout_ms: Option<u64>,
}

async fn wait_reply(
    State(b): State<Arc<Bridge>>,
    query: Result<Query<WaitQuery>, axum::extract::rejection::QueryRejection>,
) -> HttpResponse {
    let q = match query {
        Ok(Query(q)) => q,
        Err(e) => return reply(Err(err(ErrorKind::Schema, e.body_text()))),
    };
    let timeout = q.timeout_ms.map(Duration::from_millis).unwrap_or(b.default_timeout);
    reply(wait_for(&b, q.request_id, q.dvp_id, timeout).await)
}

async fn wait_for(b: &Bridge, request_id: RequestId, dvp_id: DvpId, timeout: Duration) -> Result<Value, ErrorPayload> {
    match b.replies.wait(request_id, dvp_id, timeout).await {
        Ok(r) => Ok(serde_json::to_value(r).expect("serializable")),
        Err(e @ CorrelationError::Timeout(_)) => Err(err(ErrorKind::Timeout, e.to_string())),
        Err(e) => Err(err(ErrorKind::Duplicate, e.to_string())),
    }
}

async fn command(State(b): State<Arc<Bridge>>, body: Bytes) -> HttpResponse {
    reply(handle_command(&b, &body).await)
}

async fn handle_command(b: &Bridge, body: &[u8]) -> Result<Value, ErrorPayload> {
    let msg: CommandMessage = parse_body(body)?;
    b.hub.check_open(msg.dvp_id).map_err(hub_error)?;
    let wait = (msg.command == "figure.add").then(|| figure_wait(&msg.payload)).flatten();
    let mut out = b.kernel.command(msg.dvp_id, &msg.command, msg.payload).await?;
    if let Some(ms) = wait {
        let timeout = Duration::from_millis(ms);
        let requests: Vec<(RequestId, DvpId)> = out["requestIds"]
            .as_array()
            .into_iter()
            .flatten()
            .zip(out["targets"].as_array().into_iter().flatten())
            .filter_map(|(r, t)| Some((r.as_u64()?, t.as_u64()?)))
            .collect();
        let mut replies = Vec::new();
        for (r, t) in requests {
            replies.push(wait_for(b, r, t, timeout).await?);
        }
        out["replies"] = Value::from(replies);
    }
    Ok(out)
}

/// Serves until `shutdown` resolves. Expired replies are swept once a second.
pub async fn serve(
    listener: TcpListener,
    config: ServerConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let bridge = Bridge::new(&config).await;
    serve_bridge(listener, bridge, config.static_dir, shutdown).await
}

pub async fn serve_bridge(
    listener: TcpListener,
    bridge: Arc<Bridge>,
    static_dir: Option<PathBuf>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let sweeper = {
        let b = bridge.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(Duration::from_secs(1));
            loop {
                tick.tick().await;
                b.replies.sweep();
            }
        })
    };
    let app = router(bridge, static_dir);
    let result = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    sweeper.abort();
    result
}

/// A server on an ephemeral local port, stopped when dropped.
pub struct TestServer {
    pub addr: std::net::SocketAddr,
    pub bridge: Arc<Bridge>,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
}

impl TestServer {
    pub async fn start(config: ServerConfig) -> std::io::Result<TestServer> {
        let listener = TcpListener::bind(("127.0.0.1", 0)).await?;
        let addr = listener.local_addr()?;
        let bridge = Bridge::new(&config).await;
        let (stop, rx) = tokio::sync::oneshot::channel();
        let b = bridge.clone();
        tokio::spawn(async move {
            let _ = serve_bridge(listener, b, config.static_dir, async {
                let _ = rx.await;
            })
            .await;
        });
        Ok(TestServer {
            addr,
            bridge,
            stop: Some(stop),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
    }
}
