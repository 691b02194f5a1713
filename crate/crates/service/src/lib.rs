//! Live directing sessions over HTTP: shot commands in, simulated flight and
//! telemetry out.

// `!(x > 0.0)` style checks are how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod schemas;
pub mod server;
pub mod session;
pub mod telemetry;

pub use config::{ServiceConfig, SessionConfig};
pub use error::SessionError;
pub use server::{router, AppState};
pub use session::{PlanJob, Session, SessionSnapshot, SessionState, TransitionSummary};
pub use telemetry::Telemetry;
