//! Wire messages exchanged over the bridge endpoints.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub type DvpId = u64;
pub type RequestId = u64;

pub const EVAL_PATH: &str = "/sce";
pub const SSE_PATH: &str = "/sse";
pub const SSE_REPLY_PATH: &str = "/sse-reply";
pub const WELCOME_PATH: &str = "/welcome";
pub const COMMAND_PATH: &str = "/command";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Endpoints {
    pub eval: String,
    pub sse: String,
    pub sse_reply: String,
}

impl Default for Endpoints {
    fn default() -> Self {
        Endpoints {
            eval: EVAL_PATH.into(),
            sse: SSE_PATH.into(),
            sse_reply: SSE_REPLY_PATH.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NewDVTIdMessage {
    pub dvp_id: DvpId,
    pub endpoints: Endpoints,
    pub serialization: String,
}

impl NewDVTIdMessage {
    pub fn new(dvp_id: DvpId) -> Self {
        NewDVTIdMessage {
            dvp_id,
            endpoints: Endpoints::default(),
            serialization: "json".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalOp {
    Connect,
    Disconnect,
    Eval,
    Store,
    Fetch,
}

/// Body of `POST /sce`. `connect` without a `dvpId` performs a handshake.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SCEEvalMessage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dvp_id: Option<DvpId>,
    pub op: EvalOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// A data source document, a number or a string; for `eval`, the expression.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SSEMessage {
    pub request_id: RequestId,
    pub command: String,
    pub payload: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplyStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SSEReplyMessage {
    pub request_id: RequestId,
    pub dvp_id: DvpId,
    pub status: ReplyStatus,
    #[serde(default)]
    pub payload: Value,
}

/// Body of `POST /command`: a kernel command issued by a client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommandMessage {
    pub dvp_id: DvpId,
    pub command: String,
    #[serde(default)]
    pub payload: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Schema,
    Type,
    Protocol,
    Unbound,
    Unsupported,
    Duplicate,
    Timeout,
    Delivery,
    Query,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// Envelope of every `/sce`, `/sse-reply` and `/command` response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub status: ReplyStatus,
    pub payload: Value,
}

impl Response {
    pub fn ok(payload: Value) -> Self {
        Response {
            status: ReplyStatus::Ok,
            payload,
        }
    }

    pub fn error(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self::from_error(ErrorPayload {
            kind,
            message: message.into(),
            path: None,
        })
    }

    pub fn from_error(e: ErrorPayload) -> Self {
        Response {
            status: ReplyStatus::Error,
            payload: serde_json::to_value(e).expect("error payload serializes"),
        }
    }

    /// The error payload when `status` is `error`.
    pub fn error_payload(&self) -> Option<ErrorPayload> {
        match self.status {
            ReplyStatus::Error => serde_json::from_value(self.payload.clone()).ok(),
            ReplyStatus::Ok => None,
        }
    }
}
