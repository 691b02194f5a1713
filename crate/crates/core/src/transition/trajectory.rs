use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scene::CameraPose;
use crate::transition::easing::Easing;

pub const CSV_HEADER: &str = "t,fx,fy,fz,ax,ay,az,fov_deg";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub look_from: Vec3,
    pub look_at: Vec3,
    /// Degrees.
    pub fov: f64,
}

impl TrajectorySample {
    pub fn pose(&self) -> Result<CameraPose> {
        CameraPose::new(self.look_from, self.look_at, self.fov)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub duration: f64,
    pub samples: Vec<TrajectorySample>,
    pub easing: Easing,
}

impl Trajectory {
    /// Hold `pose` for `duration` seconds.
    pub fn constant(pose: &CameraPose, duration: f64, count: usize) -> Trajectory {
        let count = count.max(2);
        let samples = (0..count)
            .map(|i| TrajectorySample {
                t: duration * i as f64 / (count - 1) as f64,
                look_from: pose.look_from,
                look_at: pose.look_at,
                fov: pose.fov,
            })
            .collect();
        Trajectory {
            duration,
            samples,
            easing: Easing::default(),
        }
    }

    /// Same samples, timestamps multiplied by `factor`.
    pub fn stretched(&self, factor: f64) -> Trajectory {
        Trajectory {
            duration: self.duration * factor,
            samples: self
                .samples
                .iter()
                .map(|s| TrajectorySample { t: s.t * factor, ..*s })
                .collect(),
            easing: self.easing,
        }
    }

    pub fn first(&self) -> &TrajectorySample {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrajectorySample {
        &self.samples[self.samples.len() - 1]
    }

    /// Linear interpolation between neighbouring samples, held outside the
    /// time range.
    pub fn sample_at(&self, t: f64) -> TrajectorySample {
        let s = &self.samples;
        if t <= s[0].t {
            return s[0];
        }
        if t >= self.last().t {
            return *self.last();
        }
        let i = s.partition_point(|x| x.t <= t) - 1;
        let (a, b) = (&s[i], &s[i + 1]);
        let f = (t - a.t) / (b.t - a.t);
        TrajectorySample {
            t,
            look_from: a.look_from + (b.look_from - a.look_from) * f,
            look_at: a.look_at + (b.look_at - a.look_at) * f,
            fov: a.fov + (b.fov - a.fov) * f,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: self.samples.len(),
            });
        }
        if self.samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidInput("trajectory timestamps must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.samples.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let (f, a) = (&s.look_from, &s.look_at);
            let _ = writeln!(out, "{},{},{},{},{},{},{},{}", s.t, f.x, f.y, f.z, a.x, a.y, a.z, s.fov);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Trajectory> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(Error::InvalidInput(format!("expected CSV header `{CSV_HEADER}`")));
        }
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let values = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidInput(format!("row {}: {e}", i + 1)))?;
            if values.len() != 8 {
                return Err(Error::InvalidInput(format!("row {}: expected 8 columns", i + 1)));
            }
            samples.push(TrajectorySample {
                t: values[0],
                look_from: Vec3::new(values[1], values[2], values[3]),
                look_at: Vec3::new(values[4], values[5], values[6]),
                fov: values[7],
            });
        }
        let traj = Trajectory {
            duration: samples.last().map_or(0.0, |s| s.t - samples[0].t),
            samples,
            easing: Easing::default(),
        };
        traj.validate()?;
        Ok(traj)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    pub fn from_json(text: &str) -> Result<Trajectory> {
        let traj: Trajectory = serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        traj.validate()?;
        Ok(traj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Trajectory {
        let samples = (0..5)
            .map(|i| TrajectorySample {
                t: i as f64 * 0.25,
                look_from: Vec3::new(i as f64, 0.0, 1.0),
                look_at: Vec3::new(i as f64, 5.0, 1.0),
                fov: 50.0,
            })
            .collect();
        Trajectory {
            duration: 1.0,
            samples,
            easing: Easing::default(),
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = line();
        let csv = t.to_csv();
        assert!(csv.starts_with("t,fx,fy,fz,ax,ay,az,fov_deg\n"));
        let back = Trajectory::from_csv(&csv).unwrap();
        assert_eq!(back.samples, t.samples);
    }

    #[test]
    fn json_round_trip() {
        let t = line();
        assert_eq!(Trajectory::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn stretching_only_touches_time() {
        let t = line();
        let s = t.stretched(1.7);
        assert_eq!(s.duration, 1.7);
        for (a, b) in t.samples.iter().zip(&s.samples) {
            assert_eq!(a.look_from, b.look_from);
            assert_eq!(a.look_at, b.look_at);
        }
    }

    #[test]
    fn interpolated_lookup() {
        let t = line();
        let s = t.sample_at(0.375);
        assert!((s.look_from.x - 1.5).abs() < 1e-12);
        assert_eq!(t.sample_at(-1.0).look_from, t.first().look_from);
        assert_eq!(t.sample_at(9.0).look_from, t.last().look_from);
    }
}
