//! Two-subject virtual cinematography: shot placement, safe C⁴ camera
//! transitions between shots, and a simulated quadrotor platform.

// `!(x > 0.0)` style checks are how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod par;
pub mod scene;
pub mod shotgen;
pub mod simkit;
pub mod transition;

pub use config::EngineConfig;
pub use error::{Error, Result};
pub use geometry::Vec3;
pub use scene::{CameraPose, Scene, ScreenPoint, Side, SubjectId, SubjectState};
pub use shotgen::{place_shot, FramedShot, ShotSpec, ShotType};
