use cinequad_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    /// A transition is running or being planned.
    #[error("busy")]
    Busy,

    #[error("session not found")]
    NotFound,

    #[error("no trajectory has been planned yet")]
    NoTrajectory,

    /// Planner and schema errors, passed through verbatim.
    #[error(transparent)]
    Planner(#[from] CoreError),
}

impl SessionError {
    /// Stable machine-readable tag for error payloads.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::Busy => "busy",
            SessionError::NotFound => "not_found",
            SessionError::NoTrajectory => "no_trajectory",
            SessionError::Planner(e) => match e {
                CoreError::InvalidInput(_) | CoreError::TooFewSamples { .. } => "invalid_input",
                CoreError::DegenerateScene(_) => "degenerate_scene",
                CoreError::DegeneratePose | CoreError::BehindCamera => "degenerate_pose",
                CoreError::UnreachableFraming { .. } => "unreachable_framing",
                CoreError::UnsafeEndpoint { .. } => "unsafe_endpoint",
                CoreError::Infeasible(_) => "infeasible",
                CoreError::Unstretchable { .. } => "unstretchable",
                CoreError::Solver(_) => "solver",
            },
        }
    }
}
