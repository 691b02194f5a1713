//! Optimal blending of the two basis paths.
//!
//! The blend weight is discretized into `n + 1` states holding the value and
//! first four derivatives, chained by a forward-Euler integrator driven by the
//! fifth derivative. The states are an affine function of the initial state
//! and the controls, so the objective is a convex quadratic in those `n + 5`
//! unknowns. Each distance constraint involves a single scalar weight and
//! carves at most one open interval out of `[0, 1]`; the solver picks one of
//! the remaining intervals per sample and solves the resulting convex QP.
//! Starting from the `w ≡ ½` initialization the interval nearest ½ is taken;
//! runs of samples with several admissible intervals are re-solved with the
//! alternative branches and the best local solution is kept.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::transition::basis::BasisPath;
use crate::transition::qp::{self, QpStatus};

pub const STATE_DIM: usize = 5;

/// Distances may fall short of a safety radius by at most this much, meters.
pub const DISTANCE_TOLERANCE: f64 = 1e-6;

/// Value of the blend weight and its first four derivatives in `u`.
pub type State = [f64; STATE_DIM];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlendConfig {
    pub samples: usize,
    pub lambda: f64,
    /// Control bounds are `±control_scale / samples`.
    pub control_scale: f64,
    /// Admissible weight intervals are shrunk by this much on each side.
    pub interval_margin: f64,
    pub max_branch_runs: usize,
}

impl Default for BlendConfig {
    fn default() -> Self {
        BlendConfig {
            samples: 50,
            lambda: 1e-4,
            control_scale: 5.0e4,
            interval_margin: 1e-7,
            max_branch_runs: 6,
        }
    }
}

/// Integrator matrices: `w_{k+1} = w_k + (M w_k + N v_k) du`.
pub fn integrator_matrices() -> ([[f64; STATE_DIM]; STATE_DIM], [f64; STATE_DIM]) {
    let mut m = [[0.0; STATE_DIM]; STATE_DIM];
    for (i, row) in m.iter_mut().enumerate().take(STATE_DIM - 1) {
        row[i + 1] = 1.0;
    }
    (m, [0.0, 0.0, 0.0, 0.0, 1.0])
}

/// Integrate the controls `v` from the initial state `w0`.
pub fn integrate(w0: &State, v: &[f64], du: f64) -> Vec<State> {
    let mut states = Vec::with_capacity(v.len() + 1);
    let mut w = *w0;
    states.push(w);
    for &vk in v {
        let mut next = w;
        for j in 0..STATE_DIM - 1 {
            next[j] = w[j] + w[j + 1] * du;
        }
        next[STATE_DIM - 1] = w[STATE_DIM - 1] + vk * du;
        w = next;
        states.push(w);
    }
    states
}

/// `Σ_k ((w_k − ½)² + λ (d⁴w/du⁴)_k²) du` over all states.
pub fn objective(states: &[State], lambda: f64, du: f64) -> f64 {
    states
        .iter()
        .map(|w| ((w[0] - 0.5).powi(2) + lambda * w[4].powi(2)) * du)
        .sum()
}

/// A closed sub-interval of admissible weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, w: f64) -> bool {
        self.lo <= w && w <= self.hi
    }

    fn distance_to(&self, w: f64) -> f64 {
        if w < self.lo {
            self.lo - w
        } else if w > self.hi {
            w - self.hi
        } else {
            0.0
        }
    }
}

/// Weights `w` for which `|a + w b| < radius`, if any.
fn forbidden_interval(a: &Vec3, b: &Vec3, radius: f64) -> Option<(f64, f64)> {
    let bb = b.norm_squared();
    let aa = a.norm_squared() - radius * radius;
    if bb < 1e-24 {
        return if aa < 0.0 { Some((f64::NEG_INFINITY, f64::INFINITY)) } else { None };
    }
    let ab = a.dot(b);
    let disc = ab * ab - bb * aa;
    if disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    Some(((-ab - root) / bb, (-ab + root) / bb))
}

#[derive(Debug, Clone)]
pub struct BlendProblem {
    pub n: usize,
    pub du: f64,
    pub lambda: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub basis_a: BasisPath,
    pub basis_b: BasisPath,
    pub d_min_a: f64,
    pub d_min_b: f64,
    pub interval_margin: f64,
    pub max_branch_runs: usize,
    sigma_a: Vec<Vec3>,
    sigma_b: Vec<Vec3>,
}

impl BlendProblem {
    pub fn new(basis_a: BasisPath, basis_b: BasisPath, d_min_a: f64, d_min_b: f64, cfg: &BlendConfig) -> Result<Self> {
        let bound = cfg.control_scale / cfg.samples as f64;
        Self::with_bounds(basis_a, basis_b, d_min_a, d_min_b, cfg, -bound, bound)
    }

    pub fn with_bounds(
        basis_a: BasisPath,
        basis_b: BasisPath,
        d_min_a: f64,
        d_min_b: f64,
        cfg: &BlendConfig,
        v_min: f64,
        v_max: f64,
    ) -> Result<Self> {
        let n = cfg.samples;
        if n < 2 {
            return Err(Error::InvalidInput(format!("blend needs at least 2 samples, got {n}")));
        }
        if !(v_min < 0.0 && 0.0 < v_max) {
            return Err(Error::InvalidInput("control bounds must straddle zero".into()));
        }
        if !(cfg.lambda >= 0.0) {
            return Err(Error::InvalidInput("lambda must be non-negative".into()));
        }
        let us = (0..=n).map(|k| sample_u(k, n));
        let sigma_a = us.clone().map(|u| basis_a.eval(u)).collect();
        let sigma_b = us.map(|u| basis_b.eval(u)).collect();
        Ok(BlendProblem {
            n,
            du: 1.0 / n as f64,
            lambda: cfg.lambda,
            v_min,
            v_max,
            basis_a,
            basis_b,
            d_min_a,
            d_min_b,
            interval_margin: cfg.interval_margin,
            max_branch_runs: cfg.max_branch_runs,
            sigma_a,
            sigma_b,
        })
    }

    pub fn basis_samples(&self) -> (&[Vec3], &[Vec3]) {
        (&self.sigma_a, &self.sigma_b)
    }

    /// Blended camera position at sample `k` for weight `w`.
    pub fn point(&self, k: usize, w: f64) -> Vec3 {
        blend_point(&self.sigma_a[k], &self.sigma_b[k], w)
    }

    pub fn distances(&self, k: usize, w: f64) -> (f64, f64) {
        let p = self.point(k, w);
        (
            (p - self.basis_a.subject_position).norm(),
            (p - self.basis_b.subject_position).norm(),
        )
    }

    /// Worst signed clearance to either safety sphere over all samples.
    pub fn min_clearance(&self, states: &[State]) -> f64 {
        states
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let (da, db) = self.distances(k, w[0]);
                (da - self.d_min_a).min(db - self.d_min_b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Every constraint of the blend problem holds for `states` and `v`.
    pub fn is_feasible(&self, states: &[State], v: &[f64], tol: f64) -> bool {
        states.len() == self.n + 1
            && v.len() == self.n
            && states.iter().all(|w| (-tol..=1.0 + tol).contains(&w[0]))
            && v.iter().all(|&vk| self.v_min - tol <= vk && vk <= self.v_max + tol)
            && self.min_clearance(states) >= -tol
    }

    /// Admissible weight intervals per sample (before the solver margin).
    pub fn admissible_sets(&self) -> Vec<Vec<Interval>> {
        let pa = self.basis_a.subject_position;
        let pb = self.basis_b.subject_position;
        (0..=self.n)
            .map(|k| {
                let b = self.sigma_a[k] - self.sigma_b[k];
                let sets = |slack: f64| {
                    let mut gaps = Vec::new();
                    for (p, r) in [(pa, self.d_min_a), (pb, self.d_min_b)] {
                        if let Some(gap) = forbidden_interval(&(self.sigma_b[k] - p), &b, r - slack) {
                            gaps.push(gap);
                        }
                    }
                    subtract_gaps(&gaps)
                };
                let exact = sets(0.0);
                // samples next to an endpoint lying exactly on a sphere may
                // only be admissible within the tolerance
                if exact.iter().any(|i| i.hi - i.lo > 4.0 * self.interval_margin) {
                    exact
                } else {
                    sets(0.5 * DISTANCE_TOLERANCE)
                }
            })
            .collect()
    }
}

fn sample_u(k: usize, n: usize) -> f64 {
    if k == n { 1.0 } else { k as f64 / n as f64 }
}

/// `w σ_A + (1 − w) σ_B`, exact at `w ∈ {0, 1}` and when the bases coincide.
pub fn blend_point(sa: &Vec3, sb: &Vec3, w: f64) -> Vec3 {
    if w == 1.0 {
        *sa
    } else if w == 0.0 {
        *sb
    } else {
        sb + (sa - sb) * w
    }
}

fn subtract_gaps(gaps: &[(f64, f64)]) -> Vec<Interval> {
    let mut pieces = vec![Interval { lo: 0.0, hi: 1.0 }];
    for &(glo, ghi) in gaps {
        let mut next = Vec::new();
        for piece in pieces {
            if ghi <= piece.lo || glo >= piece.hi {
                next.push(piece);
                continue;
            }
            if glo > piece.lo {
                next.push(Interval { lo: piece.lo, hi: glo });
            }
            if ghi < piece.hi {
                next.push(Interval { lo: ghi, hi: piece.hi });
            }
        }
        pieces = next;
    }
    pieces
}

/// Solved blend profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendSolution {
    pub w: Vec<State>,
    pub v: Vec<f64>,
    pub objective_value: f64,
    pub converged: bool,
    pub solve_time: f64,
}

impl BlendSolution {
    pub fn weights(&self) -> Vec<f64> {
        self.w.iter().map(|s| s[0]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    NearestHalf,
    Lowest,
    Highest,
}

fn pick(set: &[Interval], branch: Branch) -> Interval {
    match branch {
        Branch::Lowest => set[0],
        Branch::Highest => set[set.len() - 1],
        Branch::NearestHalf => {
            let mut best = set[0];
            for iv in &set[1..] {
                // ties go to the larger weights
                if iv.distance_to(0.5) <= best.distance_to(0.5) {
                    best = *iv;
                }
            }
            best
        }
    }
}

/// Linear maps from the unknowns `(w_0, v)` to each sample's weight and
/// fourth derivative.
struct LinearMaps {
    value: Vec<Vec<f64>>,
    fourth: Vec<Vec<f64>>,
}

impl LinearMaps {
    fn new(n: usize, du: f64) -> Self {
        let dim = n + STATE_DIM;
        let mut value = vec![vec![0.0; dim]; n + 1];
        let mut fourth = vec![vec![0.0; dim]; n + 1];
        for i in 0..dim {
            let mut w0 = [0.0; STATE_DIM];
            let mut v = vec![0.0; n];
            if i < STATE_DIM {
                w0[i] = 1.0;
            } else {
                v[i - STATE_DIM] = 1.0;
            }
            for (k, s) in integrate(&w0, &v, du).iter().enumerate() {
                value[k][i] = s[0];
                fourth[k][i] = s[4];
            }
        }
        LinearMaps { value, fourth }
    }
}

struct Qp {
    hessian: Vec<Vec<f64>>,
    linear: Vec<f64>,
    scale: Vec<f64>,
    maps: LinearMaps,
}

impl Qp {
    fn new(problem: &BlendProblem) -> Self {
        let n = problem.n;
        let du = problem.du;
        let dim = n + STATE_DIM;
        let maps = LinearMaps::new(n, du);
        // column scaling of the stacked objective rows
        let scale: Vec<f64> = (0..dim)
            .map(|i| {
                let s: f64 = (0..=n)
                    .map(|k| maps.value[k][i].powi(2) + problem.lambda * maps.fourth[k][i].powi(2))
                    .sum();
                if s > 0.0 { 1.0 / s.sqrt() } else { 1.0 }
            })
            .collect();
        let mut hessian = vec![vec![0.0; dim]; dim];
        let mut linear = vec![0.0; dim];
        for k in 0..=n {
            let l0 = &maps.value[k];
            let l4 = &maps.fourth[k];
            for i in 0..dim {
                linear[i] -= du * l0[i] * scale[i];
                if l0[i] == 0.0 && l4[i] == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    hessian[i][j] += 2.0 * du * (l0[i] * l0[j] + problem.lambda * l4[i] * l4[j]) * scale[i] * scale[j];
                }
            }
        }
        Qp {
            hessian,
            linear,
            scale,
            maps,
        }
    }

    fn solve(&self, problem: &BlendProblem, intervals: &[Interval]) -> Result<Option<(Vec<f64>, QpStatus)>> {
        let n = problem.n;
        let dim = n + STATE_DIM;
        let mut g = Vec::with_capacity(4 * n + 2);
        let mut h = Vec::with_capacity(4 * n + 2);
        for (k, iv) in intervals.iter().enumerate() {
            let row: Vec<f64> = (0..dim).map(|i| self.maps.value[k][i] * self.scale[i]).collect();
            h.push(iv.hi);
            h.push(-iv.lo);
            g.push(row.clone());
            g.push(row.into_iter().map(|c| -c).collect());
        }
        let shrink = 1.0 - 1e-9;
        for j in 0..n {
            let i = STATE_DIM + j;
            let mut upper = vec![0.0; dim];
            upper[i] = self.scale[i];
            let lower = upper.iter().map(|c| -c).collect();
            g.push(upper);
            h.push(problem.v_max * shrink);
            g.push(lower);
            h.push(-problem.v_min * shrink);
        }
        Ok(qp::solve_dense(&self.hessian, &self.linear, &g, &h)?
            .map(|sol| (sol.x.iter().zip(&self.scale).map(|(y, s)| y * s).collect(), sol.status)))
    }
}

fn unpack(x: &[f64]) -> (State, Vec<f64>) {
    let mut w0 = [0.0; STATE_DIM];
    w0.copy_from_slice(&x[..STATE_DIM]);
    (w0, x[STATE_DIM..].to_vec())
}

/// Solve the blend problem locally from the `w ≡ ½` initialization.
pub fn solve_blend(problem: &BlendProblem) -> Result<BlendSolution> {
    let started = Instant::now();
    let n = problem.n;
    let sets = problem.admissible_sets();
    let margin = problem.interval_margin;
    let shrunk: Vec<Vec<Interval>> = sets
        .iter()
        .map(|set| {
            set.iter()
                .map(|iv| {
                    let shrink = margin.min(0.25 * (iv.hi - iv.lo));
                    Interval {
                        lo: iv.lo + shrink,
                        hi: iv.hi - shrink,
                    }
                })
                .collect()
        })
        .collect();
    if let Some(k) = shrunk.iter().position(|s| s.is_empty()) {
        return Err(Error::Infeasible(format!(
            "no admissible blend weight at sample {k}: both safety spheres cover the segment between the basis paths"
        )));
    }

    let elapsed = |t: Instant| t.elapsed().as_secs_f64() * 1e3;

    // the unconstrained optimum is w ≡ ½ with zero objective
    if shrunk.iter().all(|set| set.iter().any(|iv| iv.contains(0.5))) {
        let w = integrate(&[0.5, 0.0, 0.0, 0.0, 0.0], &vec![0.0; n], problem.du);
        return Ok(BlendSolution {
            objective_value: objective(&w, problem.lambda, problem.du),
            w,
            v: vec![0.0; n],
            converged: true,
            solve_time: elapsed(started),
        });
    }

    let default: Vec<Branch> = vec![Branch::NearestHalf; n + 1];
    let mut candidates = vec![default.clone()];
    let mut k = 0;
    let mut runs = 0;
    while k <= n && runs < problem.max_branch_runs {
        if shrunk[k].len() < 2 {
            k += 1;
            continue;
        }
        let start = k;
        while k <= n && shrunk[k].len() >= 2 {
            k += 1;
        }
        for branch in [Branch::Lowest, Branch::Highest] {
            let mut c = default.clone();
            c[start..k].iter_mut().for_each(|b| *b = branch);
            let differs = (start..k).any(|i| pick(&shrunk[i], branch) != pick(&shrunk[i], Branch::NearestHalf));
            if differs {
                candidates.push(c);
            }
        }
        runs += 1;
    }

    let qp = Qp::new(problem);
    let mut best: Option<(f64, Vec<State>, Vec<f64>, bool)> = None;
    for branches in &candidates {
        let intervals: Vec<Interval> = branches.iter().zip(&shrunk).map(|(b, set)| pick(set, *b)).collect();
        let Some((x, status)) = qp.solve(problem, &intervals)? else {
            continue;
        };
        let (w0, v) = unpack(&x);
        let w = integrate(&w0, &v, problem.du);
        if !problem.is_feasible(&w, &v, DISTANCE_TOLERANCE) {
            log::debug!("blend candidate rejected: solver returned an infeasible point ({status:?})");
            continue;
        }
        let obj = objective(&w, problem.lambda, problem.du);
        if best.as_ref().is_none_or(|(b, ..)| obj < *b) {
            best = Some((obj, w, v, status == QpStatus::Solved));
        }
    }

    match best {
        Some((objective_value, w, v, converged)) => {
            if !converged {
                log::warn!("blend solve did not fully converge; returning best feasible iterate");
            }
            Ok(BlendSolution {
                w,
                v,
                objective_value,
                converged,
                solve_time: elapsed(started),
            })
        }
        None => Err(Error::Infeasible(
            "no blend profile satisfies the continuity and distance constraints".into(),
        )),
    }
}

/// Blended camera positions `σ_k` for `k = 0..=n`.
pub fn blend_path(solution: &BlendSolution, basis_a: &BasisPath, basis_b: &BasisPath) -> Vec<Vec3> {
    let n = solution.w.len() - 1;
    solution
        .w
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let u = sample_u(k, n);
            blend_point(&basis_a.eval(u), &basis_b.eval(u), s[0])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SubjectId;

    fn basis(subject: SubjectId, p: Vec3, c0: Vec3, c1: Vec3) -> BasisPath {
        BasisPath::new(subject, p, c0, c1, &Vec3::new(0.0, -1.0, 0.0))
    }

    /// Subjects on the x axis, camera swinging around the far side of A so
    /// that B's basis passes right through A.
    fn swing(radius: f64) -> BlendProblem {
        let pa = Vec3::new(1.0, 0.0, 0.0);
        let pb = Vec3::new(3.3, 0.0, 0.0);
        let c0 = Vec3::new(1.3, 1.15, 0.0);
        let c1 = Vec3::new(1.3, -1.15, 0.0);
        BlendProblem::new(
            basis(SubjectId::A, pa, c0, c1),
            basis(SubjectId::B, pb, c0, c1),
            radius,
            radius,
            &BlendConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn integrator_matches_matrix_form() {
        let (m, nvec) = integrator_matrices();
        let w0 = [0.3, -0.2, 1.5, 4.0, -7.0];
        let v = [10.0, -3.0, 2.5];
        let du = 0.1;
        let states = integrate(&w0, &v, du);
        for k in 0..v.len() {
            for i in 0..STATE_DIM {
                let mw: f64 = (0..STATE_DIM).map(|j| m[i][j] * states[k][j]).sum();
                let expect = states[k][i] + (mw + nvec[i] * v[k]) * du;
                assert!((states[k + 1][i] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaps_split_the_unit_interval() {
        let pieces = subtract_gaps(&[(0.2, 0.4), (-1.0, 0.1), (0.9, 2.0)]);
        assert_eq!(
            pieces,
            vec![Interval { lo: 0.1, hi: 0.2 }, Interval { lo: 0.4, hi: 0.9 }]
        );
    }

    #[test]
    fn half_blend_is_returned_when_feasible() {
        let problem = swing(0.3);
        let sol = solve_blend(&problem).unwrap();
        assert!(sol.w.iter().all(|s| (s[0] - 0.5).abs() < 1e-9));
        assert!(sol.objective_value < 1e-12);
    }

    #[test]
    fn clipping_average_is_pushed_toward_the_safe_basis() {
        let problem = swing(1.0);
        let (sa, sb) = problem.basis_samples();
        let clipped = (0..=problem.n).any(|k| {
            let mid = blend_point(&sa[k], &sb[k], 0.5);
            (mid - problem.basis_a.subject_position).norm() < 1.0
        });
        assert!(clipped, "fixture should have the ½ path violate A's sphere");
        let sol = solve_blend(&problem).unwrap();
        assert!(problem.is_feasible(&sol.w, &sol.v, 0.0));
        assert!(problem.min_clearance(&sol.w) >= 0.0);
        assert!(sol.w.iter().any(|s| s[0] > 0.5), "weight shifts toward A's basis");
        // integrator consistency
        let replay = integrate(&sol.w[0], &sol.v, problem.du);
        for (a, b) in replay.iter().zip(&sol.w) {
            for j in 0..STATE_DIM {
                assert!((a[j] - b[j]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn overlapping_spheres_are_infeasible() {
        // overlapping spheres; at mid-swing each basis sits inside the other
        // subject's sphere and the segment between them is covered
        let pa = Vec3::new(0.0, 0.0, 0.0);
        let pb = Vec3::new(1.0, 0.0, 0.0);
        let c0 = Vec3::new(0.5, 1.2, 0.0);
        let c1 = Vec3::new(0.5, -1.2, 0.0);
        let problem = BlendProblem::new(
            basis(SubjectId::A, pa, c0, c1),
            basis(SubjectId::B, pb, c0, c1),
            1.0,
            1.0,
            &BlendConfig::default(),
        )
        .unwrap();
        assert!(matches!(solve_blend(&problem), Err(Error::Infeasible(_))));
    }

    #[test]
    fn blend_path_endpoints_and_extremes() {
        let problem = swing(1.0);
        let sol = solve_blend(&problem).unwrap();
        let path = blend_path(&sol, &problem.basis_a, &problem.basis_b);
        assert_eq!(path[0], problem.basis_a.eval(0.0));
        assert_eq!(path[problem.n], problem.basis_a.eval(1.0));

        let n = problem.n;
        let ones = BlendSolution {
            w: vec![[1.0, 0.0, 0.0, 0.0, 0.0]; n + 1],
            v: vec![0.0; n],
            objective_value: 0.0,
            converged: true,
            solve_time: 0.0,
        };
        let zeros = BlendSolution {
            w: vec![[0.0; STATE_DIM]; n + 1],
            ..ones.clone()
        };
        let (sa, sb) = problem.basis_samples();
        assert_eq!(blend_path(&ones, &problem.basis_a, &problem.basis_b), sa);
        assert_eq!(blend_path(&zeros, &problem.basis_a, &problem.basis_b), sb);
    }
}
