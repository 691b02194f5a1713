//! Point-mass quadrotor following look-from setpoints, with a two-axis gimbal.

use serde::{Deserialize, Serialize};

use crate::dynamics::QuadrotorLimits;
use crate::geometry::Vec3;
use crate::scene::SubjectState;

/// Cascaded position → velocity controller. `kv = 4·kp` is critically damped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FollowerGains {
    pub kp: f64,
    pub kv: f64,
    /// Fraction of `a_max` budgeted for braking into the setpoint.
    pub brake_fraction: f64,
}

impl Default for FollowerGains {
    fn default() -> Self {
        FollowerGains {
            kp: 2.0,
            kv: 8.0,
            brake_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoint {
    pub look_from: Vec3,
    pub look_at: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceleration: Option<Vec3>,
}

impl Setpoint {
    pub fn hold(look_from: Vec3, look_at: Vec3) -> Self {
        Setpoint {
            look_from,
            look_at,
            velocity: None,
            acceleration: None,
        }
    }
}

/// Degrees; tilt negative looking down.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Gimbal {
    pub pan: f64,
    pub tilt: f64,
}

impl Gimbal {
    pub fn pointing(from: &Vec3, to: &Vec3) -> Gimbal {
        let d = to - from;
        Gimbal {
            pan: d.y.atan2(d.x).to_degrees(),
            tilt: d.z.atan2(d.xy().norm()).to_degrees(),
        }
    }

    pub fn direction(&self) -> Vec3 {
        let (pan, tilt) = (self.pan.to_radians(), self.tilt.to_radians());
        Vec3::new(tilt.cos() * pan.cos(), tilt.cos() * pan.sin(), tilt.sin())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub time: f64,
    pub quad_position: Vec3,
    pub quad_velocity: Vec3,
    pub gimbal: Gimbal,
    pub true_subjects: [SubjectState; 2],
    pub rng_seed: u64,
}

impl SimState {
    /// At rest at `look_from`, gimbal already on `look_at`.
    pub fn at_rest(look_from: Vec3, look_at: Vec3, subjects: [SubjectState; 2], seed: u64) -> SimState {
        SimState {
            time: 0.0,
            quad_position: look_from,
            quad_velocity: Vec3::zeros(),
            gimbal: Gimbal::pointing(&look_from, &look_at),
            true_subjects: subjects,
            rng_seed: seed,
        }
    }
}

fn clamp_norm(v: Vec3, max: f64) -> Vec3 {
    let n = v.norm();
    if n > max { v * (max / n) } else { v }
}

fn slew(current: f64, target: f64, max_step: f64, wrap: bool) -> f64 {
    let mut diff = target - current;
    if wrap {
        diff = (diff + 180.0).rem_euclid(360.0) - 180.0;
    }
    let next = current + diff.clamp(-max_step, max_step);
    if wrap { (next + 180.0).rem_euclid(360.0) - 180.0 } else { next }
}

/// Commanded acceleration for tracking `setpoint` from the given position
/// and velocity (before the semi-implicit update).
pub fn command(
    position: &Vec3,
    velocity: &Vec3,
    setpoint: &Setpoint,
    limits: &QuadrotorLimits,
    gains: &FollowerGains,
) -> Vec3 {
    let error = setpoint.look_from - position;
    let dist = error.norm();
    let approach = if dist > 0.0 {
        let speed = (gains.kp * dist)
            .min(limits.v_max)
            .min((2.0 * gains.brake_fraction * limits.a_max * dist).sqrt());
        error * (speed / dist)
    } else {
        Vec3::zeros()
    };
    let desired = setpoint.velocity.unwrap_or_else(Vec3::zeros) + approach;
    let accel = (desired - velocity) * gains.kv + setpoint.acceleration.unwrap_or_else(Vec3::zeros);
    clamp_norm(accel, limits.a_max)
}

/// Advance the simulation by `dt` seconds toward `setpoint`.
pub fn step(state: &SimState, setpoint: &Setpoint, dt: f64, limits: &QuadrotorLimits, gains: &FollowerGains) -> SimState {
    debug_assert!(dt > 0.0 && dt <= 0.1, "dt out of range: {dt}");
    let accel = command(&state.quad_position, &state.quad_velocity, setpoint, limits, gains);
    let velocity = clamp_norm(state.quad_velocity + accel * dt, limits.v_max);
    let position = state.quad_position + velocity * dt;

    let target = if (setpoint.look_at - position).norm() > 1e-9 {
        Gimbal::pointing(&position, &setpoint.look_at)
    } else {
        state.gimbal
    };
    let max_slew = limits.gimbal_rate_max * dt;
    let gimbal = Gimbal {
        pan: slew(state.gimbal.pan, target.pan, max_slew, true),
        tilt: slew(state.gimbal.tilt, target.tilt, max_slew, false),
    };
    SimState {
        time: state.time + dt,
        quad_position: position,
        quad_velocity: velocity,
        gimbal,
        true_subjects: state.true_subjects,
        rng_seed: state.rng_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subjects() -> [SubjectState; 2] {
        [
            SubjectState::new(Vec3::new(0.0, 0.0, 1.6), Vec3::new(0.0, -1.0, 0.0), 1.8, 1.0).unwrap(),
            SubjectState::new(Vec3::new(2.0, 0.0, 1.6), Vec3::new(0.0, -1.0, 0.0), 1.8, 1.0).unwrap(),
        ]
    }

    #[test]
    fn equilibrium_is_unchanged() {
        let s = SimState::at_rest(Vec3::new(1.0, -5.0, 1.6), Vec3::new(1.0, 0.0, 1.6), subjects(), 7);
        let sp = Setpoint::hold(s.quad_position, Vec3::new(1.0, 0.0, 1.6));
        let next = step(&s, &sp, 0.02, &QuadrotorLimits::default(), &FollowerGains::default());
        assert_eq!(next.quad_position, s.quad_position);
        assert_eq!(next.quad_velocity, s.quad_velocity);
        assert!((next.gimbal.pan - s.gimbal.pan).abs() < 1e-12);
    }

    #[test]
    fn converges_without_overshoot() {
        let lim = QuadrotorLimits::default();
        let gains = FollowerGains::default();
        let target = Vec3::new(40.0, 10.0, 5.0);
        let mut s = SimState::at_rest(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), subjects(), 0);
        let initial = target.norm();
        let sp = Setpoint::hold(target, target + Vec3::new(1.0, 0.0, 0.0));
        let mut max_overshoot: f64 = 0.0;
        let mut settled = None;
        for i in 0..3000 {
            s = step(&s, &sp, 0.02, &lim, &gains);
            // overshoot: progress past the target along the approach axis
            let along = (s.quad_position - target).dot(&(target / initial));
            max_overshoot = max_overshoot.max(along);
            if settled.is_none() && (s.quad_position - target).norm() < 0.05 {
                settled = Some(i);
            }
        }
        assert!(settled.is_some());
        assert!(max_overshoot <= 0.1 * initial);
        assert!((s.quad_position - target).norm() < 0.05);
    }

    #[test]
    fn acceleration_is_clamped() {
        let lim = QuadrotorLimits::default();
        let mut s = SimState::at_rest(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), subjects(), 0);
        let sp = Setpoint::hold(Vec3::new(100.0, 0.0, 0.0), Vec3::new(101.0, 0.0, 0.0));
        let dt = 0.02;
        for _ in 0..200 {
            let next = step(&s, &sp, dt, &lim, &FollowerGains::default());
            assert!(next.quad_velocity.norm() - s.quad_velocity.norm() <= lim.a_max * dt + 1e-12);
            assert!(next.quad_velocity.norm() <= lim.v_max + 1e-12);
            s = next;
        }
    }

    #[test]
    fn gimbal_slews_at_rate_limit() {
        let lim = QuadrotorLimits::default();
        let s = SimState::at_rest(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), subjects(), 0);
        let sp = Setpoint::hold(Vec3::zeros(), Vec3::new(-1.0, 0.0, 0.0));
        let next = step(&s, &sp, 0.1, &lim, &FollowerGains::default());
        assert!((next.gimbal.pan.abs() - 9.0).abs() < 1e-9);
    }
}
