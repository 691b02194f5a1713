//! Simulated platform: quadrotor follower, tracker noise and experiments.

pub mod experiment;
pub mod follower;
pub mod tracker;

pub use experiment::{run_fig9_experiment, run_hover_experiment, Fig9Config, Fig9Result, HoverResult};
pub use follower::{step, FollowerGains, Gimbal, Setpoint, SimState};
pub use tracker::{calibrate, sample_tracker, Calibration, Tracker, TrackerKind, TrackerModel};
