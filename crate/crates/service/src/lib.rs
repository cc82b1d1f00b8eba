//! Interactive sessions for the four lab activities, served over HTTP and
//! WebSocket.
//!
//! A [`Session`] is deterministic given its scenario, seed and the actions
//! applied to it; its hash-chained log replays to the same state. Views are
//! redacted per role by removing that role's hidden keys at every depth.

pub mod activity;
mod engine;
pub mod error;
pub mod http;
pub mod log;
pub mod redact;
pub mod session;
pub mod store;

pub use activity::{hidden_fields, Activity, Role, SessionOptions, SpyMode};
pub use error::{Result, ServiceError};
pub use http::{router, serve};
pub use log::{verify_chain, LogEntry};
pub use session::{replay, Session};
pub use store::{
    ActionRequest, ActionResponse, CreateRequest, CreateResponse, ScenarioRef, ServiceConfig,
    SessionStore,
};
