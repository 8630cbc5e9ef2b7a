//! Connected clients, id counters and per-client event streams.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::mpsc;

use super::messages::{DvpId, RequestId, SSEMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// A visualizer front end registered through `/welcome`.
    Visualizer,
    /// A computing environment registered through `connect`.
    Sce,
}

#[derive(Debug)]
struct Client {
    role: Role,
    open: bool,
    stream: Option<mpsc::UnboundedSender<SSEMessage>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HubError {
    #[error("unknown dvpId {0}")]
    UnknownClient(DvpId),
    #[error("dvpId {0} is disconnected")]
    Closed(DvpId),
    #[error("request {request_id}: dvpId {target} has no open event stream")]
    Delivery { request_id: RequestId, target: DvpId },
}

/// Both counters start at zero and only ever advance.
#[derive(Debug, Default)]
pub struct Hub {
    next_dvp: AtomicU64,
    next_request: AtomicU64,
    clients: Mutex<BTreeMap<DvpId, Client>>,
}

impl Hub {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn handshake(&self, role: Role) -> DvpId {
        let mut clients = self.clients.lock().expect("hub lock");
        // Allocated under the lock so ids enter the table in order.
        let id = self.next_dvp.fetch_add(1, Ordering::SeqCst);
        clients.insert(
            id,
            Client {
                role,
                open: true,
                stream: None,
            },
        );
        id
    }

    pub fn role(&self, id: DvpId) -> Option<Role> {
        self.clients.lock().expect("hub lock").get(&id).map(|c| c.role)
    }

    /// Fails unless `id` was handed out and is not disconnected.
    pub fn check_open(&self, id: DvpId) -> Result<Role, HubError> {
        match self.clients.lock().expect("hub lock").get(&id) {
            None => Err(HubError::UnknownClient(id)),
            Some(c) if !c.open => Err(HubError::Closed(id)),
            Some(c) => Ok(c.role),
        }
    }

    /// Reopens a known session, optionally changing its role.
    pub fn reconnect(&self, id: DvpId, role: Role) -> Result<(), HubError> {
        let mut clients = self.clients.lock().expect("hub lock");
        let c = clients.get_mut(&id).ok_or(HubError::UnknownClient(id))?;
        c.open = true;
        c.role = role;
        Ok(())
    }

    /// Marks the session closed and ends its event stream.
    pub fn disconnect(&self, id: DvpId) -> Result<(), HubError> {
        let mut clients = self.clients.lock().expect("hub lock");
        let c = clients.get_mut(&id).ok_or(HubError::UnknownClient(id))?;
        c.open = false;
        c.stream = None;
        Ok(())
    }

    /// Attaches a fresh event stream to `id`, replacing any earlier one.
    pub fn open_stream(&self, id: DvpId) -> Result<mpsc::UnboundedReceiver<SSEMessage>, HubError> {
        let mut clients = self.clients.lock().expect("hub lock");
        let c = clients.get_mut(&id).ok_or(HubError::UnknownClient(id))?;
        if !c.open {
            return Err(HubError::Closed(id));
        }
        let (tx, rx) = mpsc::unbounded_channel();
        c.stream = Some(tx);
        Ok(rx)
    }

    pub fn has_stream(&self, id: DvpId) -> bool {
        self.clients
            .lock()
            .expect("hub lock")
            .get(&id)
            .and_then(|c| c.stream.as_ref())
            .is_some_and(|s| !s.is_closed())
    }

    /// Open clients of `role` with a live event stream, ascending by id.
    pub fn listeners(&self, role: Role) -> Vec<DvpId> {
        self.clients
            .lock()
            .expect("hub lock")
            .iter()
            .filter(|(_, c)| c.role == role && c.open && c.stream.as_ref().is_some_and(|s| !s.is_closed()))
            .map(|(id, _)| *id)
            .collect()
    }

    /// Writes one event to `target`'s stream. The request id is taken
    /// before delivery is attempted, so a failed send still consumes one.
    pub fn send_sse(&self, target: DvpId, command: &str, payload: Value) -> Result<RequestId, HubError> {
        let clients = self.clients.lock().expect("hub lock");
        let request_id = self.next_request.fetch_add(1, Ordering::SeqCst);
        let delivered = clients
            .get(&target)
            .and_then(|c| c.stream.as_ref())
            .is_some_and(|s| {
                s.send(SSEMessage {
                    request_id,
                    command: command.to_string(),
                    payload,
                })
                .is_ok()
            });
        if delivered {
            Ok(request_id)
        } else {
            Err(HubError::Delivery { request_id, target })
        }
    }

    /// Next request id that will be issued.
    pub fn request_counter(&self) -> RequestId {
        self.next_request.load(Ordering::SeqCst)
    }

    pub fn dvp_counter(&self) -> DvpId {
        self.next_dvp.load(Ordering::SeqCst)
    }
}
