//! Point-mass quadrotor with a pitch gimbal: finite-difference feasibility
//! checks over trajectory samples and the time-stretch loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{up, Vec3};
use crate::transition::trajectory::Trajectory;

pub const GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadrotorLimits {
    pub v_max: f64,
    pub a_max: f64,
    pub thrust_min: f64,
    pub thrust_max: f64,
    pub mass: f64,
    /// `[min, max]` in degrees, negative looking down.
    pub gimbal_pitch_range: [f64; 2],
    pub gimbal_rate_max: f64,
}

impl Default for QuadrotorLimits {
    fn default() -> Self {
        QuadrotorLimits {
            v_max: 15.0,
            a_max: 8.0,
            thrust_min: 0.0,
            thrust_max: 30.0,
            mass: 1.5,
            gimbal_pitch_range: [-90.0, 30.0],
            gimbal_rate_max: 90.0,
        }
    }
}

impl QuadrotorLimits {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.v_max, self.a_max, self.thrust_max, self.mass, self.gimbal_rate_max];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(self.thrust_min >= 0.0) {
            return Err(Error::InvalidInput("quadrotor limits must be positive".into()));
        }
        let hover = self.mass * GRAVITY;
        if !(self.thrust_min < hover && hover < self.thrust_max) {
            return Err(Error::InvalidInput(format!(
                "hover thrust {hover:.2} N outside [{}, {}]",
                self.thrust_min, self.thrust_max
            )));
        }
        let [lo, hi] = self.gimbal_pitch_range;
        if !(lo < hi) {
            return Err(Error::InvalidInput("gimbal pitch range is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitQuantity {
    Speed,
    Accel,
    Thrust,
    GimbalPitch,
    GimbalRate,
}

impl LimitQuantity {
    /// Whether slowing the trajectory down can fix a violation.
    pub fn stretchable(self) -> bool {
        !matches!(self, LimitQuantity::GimbalPitch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub quantity: LimitQuantity,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Peaks {
    pub speed: f64,
    pub accel: f64,
    pub thrust_min: f64,
    pub thrust_max: f64,
    pub pitch_min: f64,
    pub pitch_max: f64,
    pub gimbal_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub peaks: Peaks,
}

impl FeasibilityReport {
    pub fn worst(&self, quantity: LimitQuantity) -> Option<&Violation> {
        self.violations
            .iter()
            .filter(|v| v.quantity == quantity)
            .max_by(|a, b| (a.value - a.limit).abs().total_cmp(&(b.value - b.limit).abs()))
    }
}

/// First and second derivative at interior sample `i` of unevenly spaced data.
fn fd3(t: [f64; 3], x: [Vec3; 3]) -> (Vec3, Vec3) {
    let h0 = t[1] - t[0];
    let h1 = t[2] - t[1];
    let vel = x[0] * (-h1 / (h0 * (h0 + h1))) + x[1] * ((h1 - h0) / (h0 * h1)) + x[2] * (h0 / (h1 * (h0 + h1)));
    let acc = (x[0] * h1 - x[1] * (h0 + h1) + x[2] * h0) * (2.0 / (h0 * h1 * (h0 + h1)));
    (vel, acc)
}

fn pitch_deg(from: &Vec3, at: &Vec3) -> f64 {
    let d = at - from;
    d.z.atan2(d.xy().norm()).to_degrees()
}

// relative slack so values sitting exactly on a limit are not flagged
const SLACK: f64 = 1e-9;

fn exceeds(value: f64, limit: f64) -> bool {
    value > limit + SLACK * limit.abs().max(1.0)
}

/// Evaluate every limit at every sample.
pub fn check(traj: &Trajectory, limits: &QuadrotorLimits) -> Result<FeasibilityReport> {
    let n = traj.samples.len();
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: n });
    }
    traj.validate()?;
    let [pitch_lo, pitch_hi] = limits.gimbal_pitch_range;
    let mut violations = Vec::new();
    let mut peaks = Peaks {
        thrust_min: f64::INFINITY,
        pitch_min: f64::INFINITY,
        pitch_max: f64::NEG_INFINITY,
        ..Peaks::default()
    };
    let s = &traj.samples;
    let pitches: Vec<f64> = s.iter().map(|x| pitch_deg(&x.look_from, &x.look_at)).collect();
    for (i, (sample, &pitch)) in s.iter().zip(&pitches).enumerate() {
        peaks.pitch_min = peaks.pitch_min.min(pitch);
        peaks.pitch_max = peaks.pitch_max.max(pitch);
        if exceeds(pitch, pitch_hi) || exceeds(-pitch, -pitch_lo) {
            violations.push(Violation {
                t: sample.t,
                quantity: LimitQuantity::GimbalPitch,
                value: pitch,
                limit: if pitch > pitch_hi { pitch_hi } else { pitch_lo },
            });
        }
        if i + 1 < n {
            let rate = (pitches[i + 1] - pitch).abs() / (s[i + 1].t - sample.t);
            peaks.gimbal_rate = peaks.gimbal_rate.max(rate);
            if exceeds(rate, limits.gimbal_rate_max) {
                violations.push(Violation {
                    t: 0.5 * (sample.t + s[i + 1].t),
                    quantity: LimitQuantity::GimbalRate,
                    value: rate,
                    limit: limits.gimbal_rate_max,
                });
            }
        }
    }
    for i in 1..n - 1 {
        let (vel, acc) = fd3(
            [s[i - 1].t, s[i].t, s[i + 1].t],
            [s[i - 1].look_from, s[i].look_from, s[i + 1].look_from],
        );
        let t = s[i].t;
        let speed = vel.norm();
        let accel = acc.norm();
        let thrust = limits.mass * (acc + up() * GRAVITY).norm();
        peaks.speed = peaks.speed.max(speed);
        peaks.accel = peaks.accel.max(accel);
        peaks.thrust_min = peaks.thrust_min.min(thrust);
        peaks.thrust_max = peaks.thrust_max.max(thrust);
        if exceeds(speed, limits.v_max) {
            violations.push(Violation {
                t,
                quantity: LimitQuantity::Speed,
                value: speed,
                limit: limits.v_max,
            });
        }
        if exceeds(accel, limits.a_max) {
            violations.push(Violation {
                t,
                quantity: LimitQuantity::Accel,
                value: accel,
                limit: limits.a_max,
            });
        }
        if exceeds(thrust, limits.thrust_max) || exceeds(-thrust, -limits.thrust_min) {
            violations.push(Violation {
                t,
                quantity: LimitQuantity::Thrust,
                value: thrust,
                limit: if thrust > limits.thrust_max { limits.thrust_max } else { limits.thrust_min },
            });
        }
    }
    violations.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
        peaks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StretchConfig {
    pub step: f64,
    pub max_factor: f64,
}

impl Default for StretchConfig {
    fn default() -> Self {
        StretchConfig {
            step: 1.1,
            max_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stretched {
    pub trajectory: Trajectory,
    pub factor: f64,
    pub report: FeasibilityReport,
}

/// Slow `traj` down by geometric steps until it satisfies `limits`.
pub fn time_stretch(traj: &Trajectory, limits: &QuadrotorLimits, cfg: &StretchConfig) -> Result<Stretched> {
    let mut factor = 1.0;
    let mut steps = 0;
    loop {
        let candidate = if steps == 0 { traj.clone() } else { traj.stretched(factor) };
        let report = check(&candidate, limits)?;
        if report.feasible {
            return Ok(Stretched {
                trajectory: candidate,
                factor,
                report,
            });
        }
        if let Some(v) = report.violations.iter().find(|v| !v.quantity.stretchable()) {
            return Err(Error::Unstretchable {
                quantity: v.quantity,
                factor,
            });
        }
        steps += 1;
        let next = cfg.step.powi(steps);
        if next > cfg.max_factor {
            return Err(Error::Unstretchable {
                quantity: report.violations[0].quantity,
                factor,
            });
        }
        factor = next;
    }
}
