//! The protocol server between computing environments and visualizers.

pub mod backend;
pub mod correlation;
pub mod hub;
pub mod kernel;
pub mod messages;
pub mod server;
pub mod wire;

pub use backend::{MockArithmetic, SceBackend};
pub use correlation::{CorrelationError, ReplyTable};
pub use hub::{Hub, HubError, Role};
pub use kernel::{Kernel, Variable};
pub use messages::*;
pub use server::{serve, Bridge, ServerConfig, TestServer};
