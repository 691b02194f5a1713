//! Finite-difference continuity audit of a planned transition, including
//! the junctions with the held start and end poses.
//!
//! For a function with bounded derivative `f⁽ʲ⁺¹⁾`, consecutive 5-point
//! estimates of `f⁽ʲ⁾` on a grid of spacing `h` differ by at most
//! `K_j · h · sup |f⁽ʲ⁺¹⁾|`, where `K_j` is the L1 norm of the stencil's
//! Peano kernel (all ≤ 2). A derivative discontinuity at a junction shows up
//! as a jump that does not shrink with `h`.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::transition::easing::Easing;
use crate::transition::plan::PlannedTransition;

const STENCILS: [[f64; 5]; 4] = [
    [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
    [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];

const KERNEL_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub order: usize,
    pub max_jump: f64,
    pub bound: f64,
    pub at_t: f64,
}

impl OrderCheck {
    pub fn ok(&self) -> bool {
        self.max_jump <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub orders: Vec<OrderCheck>,
    /// Largest change of the fourth-derivative state between blend samples.
    pub blend_jump: f64,
    pub blend_bound: f64,
    /// Finite-difference derivatives 1–4 of the easing curve at 0 and at 1.
    pub easing_endpoint: [[f64; 4]; 2],
    pub continuous: bool,
}

/// `order`-th derivative of `f` on a uniform grid, 5-point central stencil.
pub fn derivative(points: &[Vec3], i: usize, order: usize, h: f64) -> Vec3 {
    let w = &STENCILS[order - 1];
    (0..5).fold(Vec3::zeros(), |acc, k| acc + points[i + k - 2] * w[k]) / h.powi(order as i32)
}

/// Largest `|Δᵐ f| / hᵐ` over a uniform grid: an estimate of `sup |f⁽ᵐ⁾|`.
fn max_forward_difference(points: &[Vec3], m: usize, h: f64) -> f64 {
    let binom: Vec<f64> = (0..=m)
        .map(|k| {
            let c: f64 = (0..k).map(|j| (m - j) as f64 / (j + 1) as f64).product();
            if (m - k).is_multiple_of(2) { c } else { -c }
        })
        .collect();
    points
        .windows(m + 1)
        .map(|w| w.iter().zip(&binom).fold(Vec3::zeros(), |acc, (p, c)| acc + p * *c).norm())
        .fold(0.0, f64::max)
        / h.powi(m as i32)
}

/// Forward differences of the easing curve at 0 and backward differences at
/// 1, the latter computed through `1 − s`.
pub fn easing_endpoint_derivatives(easing: Easing, h: f64) -> [[f64; 4]; 2] {
    let mut out = [[0.0; 4]; 2];
    for m in 1..=4 {
        let mut forward = 0.0;
        let mut backward = 0.0;
        let mut c = 1.0;
        for k in 0..=m {
            let x = k as f64 * h;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            // Δᵐ s(0) = Σ (−1)^(m−k) C(m,k) s(kh)
            forward += sign * c * easing.eval(x);
            // ∇ᵐ s(1) = Σ (−1)^k C(m,k) s(1 − kh), with s(1 − kh) = 1 − tail(kh)
            // and the constant term cancelling
            backward -= sign * c * easing.tail(x);
            c = c * (m - k) as f64 / (k + 1) as f64;
        }
        let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
        out[0][m - 1] = parity * forward / h.powi(m as i32);
        out[1][m - 1] = backward / h.powi(m as i32);
    }
    out
}

/// Audit the look-from trajectory with `hold` static samples padded on each
/// side.
pub fn check_continuity(planned: &PlannedTransition, hold: usize) -> ContinuityReport {
    let traj = &planned.trajectory;
    let count = traj.samples.len();
    let dt = traj.duration / (count - 1) as f64;
    let hold = hold.max(4);
    let mut points = Vec::with_capacity(count + 2 * hold);
    points.extend(std::iter::repeat_n(traj.first().look_from, hold));
    points.extend(traj.samples.iter().map(|s| s.look_from));
    points.extend(std::iter::repeat_n(traj.last().look_from, hold));
    let scale = points.iter().map(|p| p.amax()).fold(1.0, f64::max);

    // reference derivative bounds from the continuous plan on a finer grid
    let refine = 8;
    let fine_count = refine * (count - 1) + 1;
    let fine: Vec<Vec3> = (0..fine_count)
        .map(|i| planned.plan.at(i as f64 / (fine_count - 1) as f64).0)
        .collect();
    let fine_h = dt / refine as f64;

    let mut orders = Vec::with_capacity(4);
    for order in 1..=4 {
        let sup_next = max_forward_difference(&fine, order + 1, fine_h);
        let noise = 64.0 * f64::EPSILON * scale * 16.0 / dt.powi(order as i32);
        let bound = KERNEL_BOUND * dt * sup_next + noise;
        let estimates: Vec<Vec3> = (2..points.len() - 2).map(|i| derivative(&points, i, order, dt)).collect();
        let (mut max_jump, mut at) = (0.0, 0);
        for (i, pair) in estimates.windows(2).enumerate() {
            let jump = (pair[1] - pair[0]).norm();
            if jump > max_jump {
                max_jump = jump;
                at = i;
            }
        }
        let at_t = (at as f64 + 2.5 - hold as f64) * dt;
        orders.push(OrderCheck {
            order,
            max_jump,
            bound,
            at_t,
        });
    }

    let problem = &planned.plan.problem;
    let w = &planned.plan.solution.w;
    let blend_jump = w.windows(2).map(|p| (p[1][4] - p[0][4]).abs()).fold(0.0, f64::max);
    let blend_bound = problem.v_max.max(-problem.v_min) * problem.du * (1.0 + 1e-9);

    let easing_endpoint = easing_endpoint_derivatives(traj.easing, 1e-12);
    let easing_ok = easing_endpoint.iter().flatten().all(|d| d.abs() < 1e-6);
    let continuous = orders.iter().all(OrderCheck::ok) && blend_jump <= blend_bound && easing_ok;
    ContinuityReport {
        orders,
        blend_jump,
        blend_bound,
        easing_endpoint,
        continuous,
    }
}
