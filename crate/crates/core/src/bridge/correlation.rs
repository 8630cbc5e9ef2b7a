//! Replies to server-sent requests, matched by request id.
//!
//! A reply is stored until one waiter takes it. Replies nobody waits for
//! are dropped after the hold period. Each request id accepts one reply;
//! its id stays reserved for the hold period after the reply is consumed.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use tokio::sync::Notify;
use tokio::time::Instant;

use super::messages::{DvpId, RequestId, SSEReplyMessage};

pub const DEFAULT_HOLD: Duration = Duration::from_secs(60);
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CorrelationError {
    #[error("duplicate reply for request {0}")]
    Duplicate(RequestId),
    #[error("timed out waiting for the reply to request {0}")]
    Timeout(RequestId),
}

#[derive(Debug)]
enum Slot {
    Held(SSEReplyMessage),
    Consumed,
}

#[derive(Debug)]
pub struct ReplyTable {
    hold: Duration,
    slots: Mutex<HashMap<RequestId, (Slot, Instant)>>,
    arrived: Notify,
}

impl Default for ReplyTable {
    fn default() -> Self {
        Self::new(DEFAULT_HOLD)
    }
}

impl ReplyTable {
    pub fn new(hold: Duration) -> Self {
        ReplyTable {
            hold,
            slots: Mutex::new(HashMap::new()),
            arrived: Notify::new(),
        }
    }

    pub fn hold(&self) -> Duration {
        self.hold
    }

    pub fn post(&self, reply: SSEReplyMessage) -> Result<(), CorrelationError> {
        let now = Instant::now();
        {
            let mut slots = self.slots.lock().expect("reply lock");
            Self::sweep_locked(&mut slots, now);
            if slots.contains_key(&reply.request_id) {
                return Err(CorrelationError::Duplicate(reply.request_id));
            }
            slots.insert(reply.request_id, (Slot::Held(reply), now + self.hold));
        }
        self.arrived.notify_waiters();
        Ok(())
    }

    fn take(&self, request_id: RequestId, dvp_id: DvpId) -> Option<SSEReplyMessage> {
        let mut slots = self.slots.lock().expect("reply lock");
        let (slot, expires) = slots.get_mut(&request_id)?;
        match slot {
            Slot::Held(reply) if reply.dvp_id == dvp_id => {
                let Slot::Held(reply) = std::mem::replace(slot, Slot::Consumed) else {
                    unreachable!()
                };
                *expires = Instant::now() + self.hold;
                Some(reply)
            }
            _ => None,
        }
    }

    /// Waits for the reply from `dvp_id` to `request_id`. Replies posted
    /// under the same request id by another client never match.
    pub async fn wait(
        &self,
        request_id: RequestId,
        dvp_id: DvpId,
        timeout: Duration,
    ) -> Result<SSEReplyMessage, CorrelationError> {
        let deadline = Instant::now() + timeout;
        loop {
            let notified = self.arrived.notified();
            tokio::pin!(notified);
            notified.as_mut().enable();
            if let Some(reply) = self.take(request_id, dvp_id) {
                return Ok(reply);
            }
            if tokio::time::timeout_at(deadline, notified).await.is_err() {
                return self.take(request_id, dvp_id).ok_or(CorrelationError::Timeout(request_id));
            }
        }
    }

    /// Drops expired entries; returns how many were removed.
    pub fn sweep(&self) -> usize {
        let mut slots = self.slots.lock().expect("reply lock");
        Self::sweep_locked(&mut slots, Instant::now())
    }

    fn sweep_locked(slots: &mut HashMap<RequestId, (Slot, Instant)>, now: Instant) -> usize {
        let before = slots.len();
        slots.retain(|_, (_, expires)| *expires > now);
        before - slots.len()
    }

    /// Replies stored and not yet consumed.
    pub fn held(&self) -> usize {
        self.slots
            .lock()
            .expect("reply lock")
            .values()
            .filter(|(s, _)| matches!(s, Slot::Held(_)))
            .count()
    }
}
