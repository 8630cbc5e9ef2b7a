#![allow(dead_code)]

use std::time::Duration;

use plotbridge::bridge::{CommandMessage, DvpId, NewDVTIdMessage, ReplyStatus, SSEMessage, SSEReplyMessage};
use plotbridge::mock_sce::EventStream;
use serde_json::{json, Value};

/// Test stand-in for the browser frontend: handshakes over `/welcome`,
/// listens on `/sse`, acks events and issues kernel commands.
pub struct Visualizer {
    pub http: reqwest::Client,
    pub base: String,
    pub dvp_id: DvpId,
    pub events: EventStream,
}

impl Visualizer {
    pub async fn connect(base: &str) -> Visualizer {
        let http = reqwest::Client::new();
        let hello: NewDVTIdMessage = http
            .get(format!("{base}/welcome"))
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        let events = EventStream::open(&http, base, hello.dvp_id).await.unwrap();
        Visualizer {
            http,
            base: base.to_string(),
            dvp_id: hello.dvp_id,
            events,
        }
    }

    /// Next event with the given command; earlier events are acked and skipped.
    pub async fn expect(&mut self, command: &str) -> SSEMessage {
        loop {
            let msg = self
                .events
                .next(Duration::from_secs(10))
                .await
                .unwrap_or_else(|| panic!("no {command} event"))
                .unwrap();
            if msg.command == command {
                return msg;
            }
            self.ack(&msg).await;
        }
    }

    pub async fn ack(&self, msg: &SSEMessage) -> Value {
        let reply = SSEReplyMessage {
            request_id: msg.request_id,
            dvp_id: self.dvp_id,
            status: ReplyStatus::Ok,
            payload: json!({"rendered": true}),
        };
        self.http
            .post(format!("{}/sse-reply", self.base))
            .json(&reply)
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap()
    }

    pub async fn command(&self, command: &str, payload: Value) -> Value {
        let msg = CommandMessage {
            dvp_id: self.dvp_id,
            command: command.into(),
            payload,
        };
        self.http
            .post(format!("{}/command", self.base))
            .json(&msg)
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap()
    }
}

/// Script for the full loop: the mock stores `rows`×5 random data as "d",
/// requests a figure, waits for a selection and fetches it back.
pub fn loop_script(rows: usize) -> String {
    json!({"steps": [
        {"op": "connect"},
        {"op": "store", "name": "d", "random": {"rows": rows, "cols": 5, "seed": 11}},
        {"op": "figure.add", "source": "d", "kind": "parcoords", "axes": ["c1", "c2", "c3", "c4", "c5"]},
        {"op": "await_selection", "variable": "d_sel", "timeoutMs": 10000},
        {"op": "fetch", "name": "d_sel"},
        {"op": "disconnect"}
    ]})
    .to_string()
}

/// 37 distinct row indices below 1,000, spread out and unsorted.
pub fn chosen_rows() -> Vec<usize> {
    (0..37).map(|k| (k * 613 + 29) % 1000).collect()
}
