//! Uniform quintic B-spline through the discrete blend weights, giving a
//! C⁴ weight function `w(u)` on `[0, 1]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::transition::blend::State;

const BINOM6: [f64; 7] = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];

/// `m`-th derivative of the cardinal quintic B-spline supported on `[0, 6]`.
fn cardinal(x: f64, m: usize) -> f64 {
    if x <= 0.0 || x >= 6.0 {
        return 0.0;
    }
    if x > 3.0 {
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        return sign * cardinal(6.0 - x, m);
    }
    let p = 5 - m as i32;
    let falling: f64 = (0..m).map(|k| (5 - k) as f64).product();
    let mut sum = 0.0;
    for (j, c) in BINOM6.iter().enumerate() {
        let d = x - j as f64;
        if d <= 0.0 {
            break;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * c * d.powi(p);
    }
    falling * sum / 120.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlendSpline {
    n: usize,
    coefficients: Vec<f64>,
}

impl BlendSpline {
    /// Interpolate `w_k[0]` at `u = k/n`, matching the first and second
    /// derivative states at both ends.
    pub fn fit(states: &[State]) -> Result<Self> {
        let n = states.len().saturating_sub(1);
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 3, got: states.len() });
        }
        let dim = n + 5;
        let h = 1.0 / n as f64;
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        let mut b = DVector::<f64>::zeros(dim);
        let rows = (0..=n).map(|k| (k, 0, states[k][0])).chain([
            (0, 1, states[0][1]),
            (0, 2, states[0][2]),
            (n, 1, states[n][1]),
            (n, 2, states[n][2]),
        ]);
        for (row, (k, m, value)) in rows.enumerate() {
            let scale = h.powi(-(m as i32));
            for i in k..(k + 6).min(dim) {
                a[(row, i)] = scale * cardinal(k as f64 - i as f64 + 5.0, m);
            }
            b[row] = value;
        }
        let coefficients = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Solver("spline interpolation system is singular".into()))?;
        Ok(BlendSpline {
            n,
            coefficients: coefficients.iter().copied().collect(),
        })
    }

    /// `m`-th derivative of the weight at `u ∈ [0, 1]`.
    pub fn eval(&self, u: f64, m: usize) -> f64 {
        let tau = u.clamp(0.0, 1.0) * self.n as f64;
        let h = 1.0 / self.n as f64;
        let base = tau.floor() as usize;
        let lo = base.saturating_sub(1);
        let hi = (base + 6).min(self.n + 5);
        let sum: f64 = (lo..hi)
            .map(|i| self.coefficients[i] * cardinal(tau - i as f64 + 5.0, m))
            .sum();
        sum * h.powi(-(m as i32))
    }

    pub fn value(&self, u: f64) -> f64 {
        self.eval(u, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cardinal_is_a_partition_of_unity() {
        for i in 0..20 {
            let x = i as f64 * 0.05;
            let s: f64 = (0..6).map(|j| cardinal(x + j as f64, 0)).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(cardinal(1.0, 0), 1.0 / 120.0, epsilon = 1e-15);
        assert_relative_eq!(cardinal(3.0, 0), 66.0 / 120.0, epsilon = 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for m in 0..4 {
            for &x in &[0.7, 2.2, 3.4, 5.1] {
                let fd = (cardinal(x + h, m) - cardinal(x - h, m)) / (2.0 * h);
                assert_relative_eq!(fd, cardinal(x, m + 1), epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn interpolates_samples_and_end_derivatives() {
        let n = 20;
        let du = 1.0 / n as f64;
        let states: Vec<State> = (0..=n)
            .map(|k| {
                let u = k as f64 * du;
                [0.5 + 0.3 * (3.0 * u).sin(), 0.9 * (3.0 * u).cos(), -2.7 * (3.0 * u).sin(), 0.0, 0.0]
            })
            .collect();
        let s = BlendSpline::fit(&states).unwrap();
        for (k, st) in states.iter().enumerate() {
            assert_relative_eq!(s.value(k as f64 * du), st[0], epsilon = 1e-10);
        }
        assert_relative_eq!(s.eval(0.0, 1), states[0][1], epsilon = 1e-8);
        assert_relative_eq!(s.eval(1.0, 2), states[n][2], epsilon = 1e-7);
        // smooth data is reproduced between the samples too
        let u = 0.537;
        assert_relative_eq!(s.value(u), 0.5 + 0.3 * (3.0 * u).sin(), epsilon = 1e-7);
    }

    #[test]
    fn constant_weights_stay_constant() {
        let states = vec![[0.5, 0.0, 0.0, 0.0, 0.0]; 51];
        let s = BlendSpline::fit(&states).unwrap();
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            assert_relative_eq!(s.value(u), 0.5, epsilon = 1e-12);
            assert!(s.eval(u, 4).abs() < 1e-6);
        }
    }
}
