use std::fmt;

use cinequad_core::Error as CoreError;
use serde_json::json;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(CoreError),
    /// The checked trajectory breaks a limit or a safety sphere.
    Rejected(String),
    Io(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Rejected(_) => EXIT_INFEASIBLE,
            CliError::Io(_) => EXIT_INTERNAL,
            CliError::Core(e) => match e {
                CoreError::InvalidInput(_)
                | CoreError::DegenerateScene(_)
                | CoreError::DegeneratePose
                | CoreError::BehindCamera
                | CoreError::TooFewSamples { .. } => EXIT_INPUT,
                CoreError::UnsafeEndpoint { .. }
                | CoreError::Infeasible(_)
                | CoreError::Unstretchable { .. }
                | CoreError::UnreachableFraming { .. } => EXIT_INFEASIBLE,
                CoreError::Solver(_) => EXIT_INTERNAL,
            },
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Input(_) => "invalid_input",
            CliError::Rejected(_) => "infeasible",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
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

    pub fn to_json(&self) -> String {
        json!({ "error": self.code(), "message": self.to_string() }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Rejected(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
