use cinequad_core::scene::ScreenPoint;
use cinequad_core::simkit::Gimbal;
use cinequad_core::{CameraPose, Side, Vec3};
use serde::{Deserialize, Serialize};

use crate::session::SessionState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectTelemetry {
    pub position: Vec3,
    pub gaze: Vec3,
    pub height: f64,
    pub safety_radius: f64,
    /// From the vehicle, meters.
    pub distance: f64,
    pub clearance: f64,
    /// `None` when behind the camera.
    pub screen: Option<ScreenPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionProgress {
    pub index: u64,
    pub elapsed: f64,
    pub duration: f64,
    /// Pose the transition ends at.
    pub target: CameraPose,
}

/// Look-from polyline of a planned transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPreview {
    pub duration: f64,
    pub look_from: Vec<Vec3>,
}

/// One message per simulation tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub seq: u64,
    /// Simulated seconds since the session started.
    pub t: f64,
    pub state: SessionState,
    pub camera: CameraPose,
    pub aspect_ratio: f64,
    pub quad_velocity: Vec3,
    pub gimbal: Gimbal,
    /// Commanded look-from.
    pub setpoint: Vec3,
    pub tracking_error: f64,
    pub line_of_action_side: Side,
    pub subjects: [SubjectTelemetry; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<TransitionProgress>,
    /// Set on exactly one message per transition, the tick it completes.
    pub transition_end: bool,
    /// Sent with the first message of each transition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planned_path: Option<PathPreview>,
}
