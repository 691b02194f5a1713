use serde::{Deserialize, Serialize};

/// Time reparameterization applied to a spatial path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Easing {
    /// `70x⁹ − 315x⁸ + 540x⁷ − 420x⁶ + 126x⁵`: monotone with the first four
    /// derivatives vanishing at both ends.
    #[default]
    Smoothstep9,
}

// s(x) = x⁵ · Σ c_i x^i
const COEFFS: [f64; 5] = [126.0, -420.0, 540.0, -315.0, 70.0];

fn raw(x: f64, m: usize) -> f64 {
    // derivative m of Σ c_i x^(i+5)
    let mut sum = 0.0;
    for (i, c) in COEFFS.iter().enumerate() {
        let p = i + 5;
        if m > p {
            continue;
        }
        let falling: f64 = (0..m).map(|k| (p - k) as f64).product();
        sum += c * falling * x.powi((p - m) as i32);
    }
    sum
}

impl Easing {
    pub fn eval(self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `m`-th derivative at `x`, clamped to the held endpoints outside
    /// `[0, 1]`. Evaluated through the mirror image above ½ so values near 1
    /// keep full precision.
    pub fn derivative(self, x: f64, m: usize) -> f64 {
        match self {
            Easing::Smoothstep9 => {
                if x <= 0.0 {
                    return 0.0;
                }
                if x >= 1.0 {
                    return if m == 0 { 1.0 } else { 0.0 };
                }
                if x <= 0.5 {
                    raw(x, m)
                } else {
                    // s(x) = 1 − s(1 − x)
                    let mirrored = raw(1.0 - x, m);
                    match m {
                        0 => 1.0 - mirrored,
                        _ if m % 2 == 1 => mirrored,
                        _ => -mirrored,
                    }
                }
            }
        }
    }

    /// `1 − s(1 − d)` evaluated directly in the offset `d` from the end,
    /// without cancellation for small `d`.
    pub fn tail(self, d: f64) -> f64 {
        match self {
            // the profile is point-symmetric about (½, ½)
            Easing::Smoothstep9 => self.eval(d),
        }
    }

    /// Largest first derivative, attained at the midpoint.
    pub fn peak_rate(self) -> f64 {
        self.derivative(0.5, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn endpoints_and_midpoint() {
        let e = Easing::Smoothstep9;
        assert_eq!(e.eval(0.0), 0.0);
        assert_eq!(e.eval(1.0), 1.0);
        assert_relative_eq!(e.eval(0.5), 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.peak_rate(), 630.0 / 256.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_and_monotone() {
        let e = Easing::Smoothstep9;
        let mut prev = 0.0;
        for i in 1..=1000 {
            let x = i as f64 / 1000.0;
            let s = e.eval(x);
            assert!(s >= prev);
            assert_relative_eq!(s + e.eval(1.0 - x), 1.0, epsilon = 1e-14);
            prev = s;
        }
    }

    #[test]
    fn derivatives_agree_across_the_mirror() {
        let e = Easing::Smoothstep9;
        for m in 0..=5 {
            let below = e.derivative(0.5 - 1e-12, m);
            let above = e.derivative(0.5 + 1e-12, m);
            assert!((below - above).abs() < 1e-6, "order {m}: {below} vs {above}");
        }
    }

    #[test]
    fn derivatives_match_expanded_polynomial() {
        // symbolic derivatives of the expanded form
        let e = Easing::Smoothstep9;
        let d1 = |x: f64| 630.0 * x.powi(4) * (1.0 - x).powi(4);
        let d2 = |x: f64| 2520.0 * x.powi(3) * (1.0 - x).powi(3) * (1.0 - 2.0 * x);
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert_relative_eq!(e.derivative(x, 1), d1(x), epsilon = 1e-9);
            assert_relative_eq!(e.derivative(x, 2), d2(x), epsilon = 1e-8);
        }
    }
}
