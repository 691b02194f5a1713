//! GPS-style position trackers with first-order Gauss–Markov error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::par::Exec;

/// Radius of the 95% circle of a unit isotropic 2-D Gaussian, `√(−2 ln 0.05)`.
pub fn cep95_factor() -> f64 {
    (-2.0 * 0.05f64.ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackerKind {
    Rtk,
    Conventional,
}

impl std::str::FromStr for TrackerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rtk" => Ok(TrackerKind::Rtk),
            "conventional" => Ok(TrackerKind::Conventional),
            other => Err(Error::InvalidInput(format!("unknown tracker `{other}` (expected rtk or conventional)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerModel {
    pub kind: TrackerKind,
    /// Meters.
    pub horizontal_cep95: f64,
    /// Meters.
    pub altitude_sigma: f64,
    /// Hz.
    pub update_rate: f64,
    /// Seconds.
    pub latency: f64,
    /// Seconds.
    pub correlation_time: f64,
}

impl TrackerModel {
    pub fn rtk() -> Self {
        TrackerModel {
            kind: TrackerKind::Rtk,
            horizontal_cep95: 0.017,
            altitude_sigma: 0.020,
            update_rate: 10.0,
            latency: 0.1,
            correlation_time: 20.0,
        }
    }

    pub fn conventional() -> Self {
        TrackerModel {
            kind: TrackerKind::Conventional,
            horizontal_cep95: 1.68,
            altitude_sigma: 0.108,
            update_rate: 5.0,
            latency: 0.2,
            correlation_time: 20.0,
        }
    }

    pub fn of_kind(kind: TrackerKind) -> Self {
        match kind {
            TrackerKind::Rtk => Self::rtk(),
            TrackerKind::Conventional => Self::conventional(),
        }
    }

    pub fn horizontal_sigma(&self) -> f64 {
        self.horizontal_cep95 / cep95_factor()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        TrackerModel {
            horizontal_cep95: self.horizontal_cep95 * factor,
            altitude_sigma: self.altitude_sigma * factor,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = [self.horizontal_cep95, self.altitude_sigma, self.update_rate, self.correlation_time];
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(self.latency >= 0.0) {
            return Err(Error::InvalidInput("tracker parameters must be positive".into()));
        }
        Ok(())
    }

    fn sigmas(&self) -> Vec3 {
        let h = self.horizontal_sigma();
        Vec3::new(h, h, self.altitude_sigma)
    }
}

fn gaussian(rng: &mut impl Rng) -> Vec3 {
    Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Independent measurement error drawn from the stationary distribution.
pub fn sample_tracker(model: &TrackerModel, true_position: &Vec3, rng: &mut impl Rng) -> Vec3 {
    true_position + gaussian(rng).component_mul(&model.sigmas())
}

/// Time-correlated error process for one tracked object.
#[derive(Debug, Clone)]
pub struct Tracker {
    model: TrackerModel,
    error: Vec3,
    rng: ChaCha8Rng,
}

impl Tracker {
    /// Started in the stationary distribution; `stream` separates trackers
    /// that share a seed.
    pub fn new(model: TrackerModel, seed: u64, stream: u64) -> Tracker {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let error = gaussian(&mut rng).component_mul(&model.sigmas());
        Tracker { model, error, rng }
    }

    pub fn model(&self) -> &TrackerModel {
        &self.model
    }

    pub fn error(&self) -> Vec3 {
        self.error
    }

    /// `x ← φx + √(1 − φ²)·σ·ξ` with `φ = exp(−dt/τ)`.
    pub fn advance(&mut self, dt: f64) {
        let phi = (-dt / self.model.correlation_time).exp();
        let innovation = (1.0 - phi * phi).sqrt();
        let xi = gaussian(&mut self.rng);
        self.error = self.error * phi + xi.component_mul(&self.model.sigmas()) * innovation;
    }

    pub fn measure(&self, true_position: &Vec3) -> Vec3 {
        true_position + self.error
    }
}

/// Sampled error history of one tracker at its update rate, with latency.
#[derive(Debug, Clone)]
pub struct ErrorTrace {
    pub period: f64,
    pub latency: f64,
    pub errors: Vec<Vec3>,
}

impl ErrorTrace {
    pub fn record(model: TrackerModel, seed: u64, stream: u64, duration: f64) -> ErrorTrace {
        let period = 1.0 / model.update_rate;
        let count = (duration / period).ceil() as usize + 1;
        let mut tracker = Tracker::new(model, seed, stream);
        let mut errors = Vec::with_capacity(count);
        for _ in 0..count {
            errors.push(tracker.error());
            tracker.advance(period);
        }
        ErrorTrace {
            period,
            latency: model.latency,
            errors,
        }
    }

    /// Error of the latest fix available at time `t`.
    pub fn at(&self, t: f64) -> Vec3 {
        let since = (t - self.latency).max(0.0);
        let i = ((since / self.period).floor() as usize).min(self.errors.len() - 1);
        self.errors[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub samples: usize,
    pub horizontal_cep95: f64,
    pub altitude_std: f64,
}

/// Empirical statistics from `samples` independent trackers, each run for
/// `steps` updates from its own stream.
pub fn calibrate(model: &TrackerModel, samples: usize, steps: usize, seed: u64, exec: Exec) -> Calibration {
    let dt = 1.0 / model.update_rate;
    let errors = exec.map(samples, |i| {
        let mut t = Tracker::new(*model, seed, i as u64);
        for _ in 0..steps {
            t.advance(dt);
        }
        t.error()
    });
    let mut radii: Vec<f64> = errors.iter().map(|e| e.xy().norm()).collect();
    radii.sort_by(f64::total_cmp);
    let n = errors.len() as f64;
    let mean_z = errors.iter().map(|e| e.z).sum::<f64>() / n;
    let var_z = errors.iter().map(|e| (e.z - mean_z).powi(2)).sum::<f64>() / (n - 1.0);
    Calibration {
        samples,
        horizontal_cep95: quantile_sorted(&radii, 0.95),
        altitude_std: var_z.sqrt(),
    }
}

/// Linear-interpolated quantile of ascending data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_matches_rayleigh_quantile() {
        // P(R ≤ kσ) = 1 − exp(−k²/2)
        let k = cep95_factor();
        assert!((1.0 - (-k * k / 2.0).exp() - 0.95).abs() < 1e-12);
        assert!((k - 2.448).abs() < 1e-3);
    }

    #[test]
    fn same_seed_same_stream_is_deterministic() {
        let mut a = Tracker::new(TrackerModel::conventional(), 42, 3);
        let mut b = Tracker::new(TrackerModel::conventional(), 42, 3);
        for _ in 0..100 {
            a.advance(0.2);
            b.advance(0.2);
        }
        assert_eq!(a.error(), b.error());
        let c = Tracker::new(TrackerModel::conventional(), 42, 4);
        assert_ne!(c.error(), Tracker::new(TrackerModel::conventional(), 42, 3).error());
    }

    #[test]
    fn tiny_noise_measures_truth() {
        let model = TrackerModel {
            horizontal_cep95: 1e-12,
            altitude_sigma: 1e-12,
            ..TrackerModel::rtk()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Vec3::new(3.0, 4.0, 1.7);
        assert!((sample_tracker(&model, &p, &mut rng) - p).norm() < 1e-10);
    }

    #[test]
    fn errors_are_correlated_over_short_times() {
        let mut t = Tracker::new(TrackerModel::conventional(), 9, 0);
        let before = t.error();
        t.advance(0.2);
        // φ = exp(−0.01), so the error barely moves relative to its scale
        assert!((t.error() - before).norm() < 0.5);
    }

    #[test]
    fn trace_respects_latency() {
        let trace = ErrorTrace::record(TrackerModel::rtk(), 5, 0, 2.0);
        assert_eq!(trace.at(0.05), trace.errors[0]);
        assert_eq!(trace.at(0.35), trace.errors[2]);
    }

    #[test]
    fn quantiles() {
        let v = [4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert!((quantile(&v, 0.95) - 4.8).abs() < 1e-12);
    }
}
