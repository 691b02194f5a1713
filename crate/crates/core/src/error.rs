use thiserror::Error;

use crate::dynamics::LimitQuantity;

/// Errors reported by the planners and the simulation kit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate scene: {0}")]
    DegenerateScene(String),

    #[error("degenerate pose: view direction is vertical or look-from equals look-at")]
    DegeneratePose,

    #[error("point is behind the camera")]
    BehindCamera,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unreachable framing: screen-space shift did not converge after {iterations} iterations")]
    UnreachableFraming { iterations: usize },

    #[error("unsafe endpoint: camera is {distance:.3} m from subject {subject}, inside its {radius:.3} m safety sphere")]
    UnsafeEndpoint {
        subject: char,
        distance: f64,
        radius: f64,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unstretchable: {quantity:?} still violated at stretch factor {factor:.3}")]
    Unstretchable {
        quantity: LimitQuantity,
        factor: f64,
    },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
