//! Safe, smooth camera transitions between two shots.

pub mod basis;
pub mod blend;
pub mod continuity;
pub mod easing;
pub mod plan;
mod qp;
pub mod spline;
pub mod trajectory;

pub use basis::{build_basis_paths, BasisPath};
pub use blend::{blend_path, solve_blend, BlendConfig, BlendProblem, BlendSolution};
pub use continuity::{check_continuity, ContinuityReport};
pub use easing::Easing;
pub use plan::{plan_path, plan_transition, plan_transition_poses, PlannedTransition, TransitionConfig, TransitionPlan};
pub use trajectory::{Trajectory, TrajectorySample};
