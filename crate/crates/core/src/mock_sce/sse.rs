//! Minimal `text/event-stream` client.

use std::time::Duration;

use futures::StreamExt;
use tokio::sync::mpsc;
use tokio::task::JoinHandle;

use crate::bridge::{DvpId, SSEMessage, SSE_PATH};

/// Splits complete frames off the front of `buf` and returns the `data`
/// payload of each one. Comment-only frames are skipped.
pub fn take_frames(buf: &mut String) -> Vec<String> {
    let mut out = Vec::new();
    loop {
        let normalized = buf.replace("\r\n", "\n");
        if normalized.len() != buf.len() {
            *buf = normalized;
        }
        let Some(end) = buf.find("\n\n") else { break };
        let frame: String = buf.drain(..end + 2).collect();
        let data: Vec<&str> = frame
            .lines()
            .filter_map(|l| l.strip_prefix("data:"))
            .map(|d| d.strip_prefix(' ').unwrap_or(d))
            .collect();
        if !data.is_empty() {
            out.push(data.join("\n"));
        }
    }
    out
}

/// Events read from one `/sse` stream by a background task.
pub struct EventStream {
    rx: mpsc::UnboundedReceiver<Result<SSEMessage, String>>,
    task: JoinHandle<()>,
}

impl EventStream {
    /// Returns once the server has accepted the stream.
    pub async fn open(http: &reqwest::Client, base: &str, dvp_id: DvpId) -> Result<EventStream, String> {
        let resp = http
            .get(format!("{base}{SSE_PATH}?dvpId={dvp_id}"))
            .send()
            .await
            .map_err(|e| e.to_string())?;
        if !resp.status().is_success() {
            let status = resp.status();
            let body = resp.text().await.unwrap_or_default();
            return Err(format!("event stream refused ({status}): {body}"));
        }
        let (tx, rx) = mpsc::unbounded_channel();
        let task = tokio::spawn(async move {
            let mut body = resp.bytes_stream();
            let mut buf = String::new();
            while let Some(chunk) = body.next().await {
                let Ok(chunk) = chunk else { break };
                buf.push_str(&String::from_utf8_lossy(&chunk));
                for data in take_frames(&mut buf) {
                    let msg = serde_json::from_str::<SSEMessage>(&data).map_err(|e| format!("bad event {data:?}: {e}"));
                    if tx.send(msg).is_err() {
                        return;
                    }
                }
            }
        });
        Ok(EventStream { rx, task })
    }

    /// Next event, or `None` on timeout or end of stream.
    pub async fn next(&mut self, timeout: Duration) -> Option<Result<SSEMessage, String>> {
        tokio::time::timeout(timeout, self.rx.recv()).await.ok().flatten()
    }
}

impl Drop for EventStream {
    fn drop(&mut self) {
        self.task.abort();
    }
}
