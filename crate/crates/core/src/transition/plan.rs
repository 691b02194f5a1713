use serde::{Deserialize, Serialize};

use crate::dynamics::{self, FeasibilityReport, QuadrotorLimits, StretchConfig};
use crate::error::{Error, Result};
use crate::geometry::{lerp, lerp_vec, Vec3};
use crate::scene::{CameraPose, Scene};
use crate::shotgen::FramedShot;
use crate::transition::basis::{build_basis_paths, BasisPath, BasisSummary};
use crate::transition::blend::{blend_point, solve_blend, BlendConfig, BlendProblem, BlendSolution};
use crate::transition::easing::Easing;
use crate::transition::spline::BlendSpline;
use crate::transition::trajectory::{Trajectory, TrajectorySample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransitionConfig {
    pub blend: BlendConfig,
    pub limits: QuadrotorLimits,
    pub stretch: StretchConfig,
    /// Fixed nominal duration in seconds; derived from the path length when
    /// absent.
    pub duration: Option<f64>,
    /// Nominal duration is `arc_length / (speed_fraction · v_max)`.
    pub speed_fraction: f64,
    pub min_duration: f64,
    /// Trajectory samples per second at the nominal duration.
    pub sample_rate: f64,
    pub min_samples: usize,
    /// Post-planning clearance check at this many times the sample density.
    pub dense_factor: usize,
    pub dense_tolerance: f64,
    /// Re-solves with doubled blend resolution when the dense check fails.
    pub max_refinements: usize,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        TransitionConfig {
            blend: BlendConfig::default(),
            limits: QuadrotorLimits::default(),
            stretch: StretchConfig::default(),
            duration: None,
            speed_fraction: 0.5,
            min_duration: 1.0,
            sample_rate: 50.0,
            min_samples: 101,
            dense_factor: 10,
            dense_tolerance: 0.01,
            max_refinements: 2,
        }
    }
}

/// Continuous (untimed) transition: blended look-from path plus linear
/// look-at and field-of-view interpolation.
#[derive(Debug, Clone)]
pub struct TransitionPlan {
    pub start: CameraPose,
    pub end: CameraPose,
    pub problem: BlendProblem,
    pub solution: BlendSolution,
    pub spline: BlendSpline,
    pub easing: Easing,
}

impl TransitionPlan {
    pub fn basis_a(&self) -> &BasisPath {
        &self.problem.basis_a
    }

    pub fn basis_b(&self) -> &BasisPath {
        &self.problem.basis_b
    }

    /// Look-from at path parameter `u`.
    pub fn path(&self, u: f64) -> Vec3 {
        let u = u.clamp(0.0, 1.0);
        let w = self.spline.value(u);
        blend_point(&self.problem.basis_a.eval(u), &self.problem.basis_b.eval(u), w)
    }

    /// Eased sample at normalized time `x ∈ [0, 1]`.
    pub fn at(&self, x: f64) -> (Vec3, Vec3, f64) {
        let s = self.easing.eval(x);
        (
            self.path(s),
            lerp_vec(&self.start.look_at, &self.end.look_at, s),
            lerp(self.start.fov, self.end.fov, s),
        )
    }

    pub fn arc_length(&self, segments: usize) -> f64 {
        let mut prev = self.path(0.0);
        let mut total = 0.0;
        for i in 1..=segments {
            let p = self.path(i as f64 / segments as f64);
            total += (p - prev).norm();
            prev = p;
        }
        total
    }

    /// `count` samples on a uniform grid over `duration`.
    pub fn sample(&self, duration: f64, count: usize) -> Trajectory {
        let samples = (0..count)
            .map(|i| {
                let x = if i + 1 == count { 1.0 } else { i as f64 / (count - 1) as f64 };
                let (look_from, look_at, fov) = self.at(x);
                TrajectorySample {
                    t: duration * x,
                    look_from,
                    look_at,
                    fov,
                }
            })
            .collect();
        Trajectory {
            duration,
            samples,
            easing: self.easing,
        }
    }

    /// Worst signed clearance over a uniform grid of `count` points in time.
    pub fn dense_clearance(&self, scene: &Scene, count: usize) -> f64 {
        (0..count)
            .map(|i| scene.clearance(&self.at(i as f64 / (count - 1) as f64).0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> BlendDump {
        let n = self.problem.n;
        let (sa, sb) = self.problem.basis_samples();
        let mut distances = Vec::with_capacity(n + 1);
        for (k, state) in self.solution.w.iter().enumerate() {
            let p = blend_point(&sa[k], &sb[k], state[0]);
            distances.push([
                (p - self.problem.basis_a.subject_position).norm(),
                (p - self.problem.basis_b.subject_position).norm(),
            ]);
        }
        BlendDump {
            n,
            lambda: self.problem.lambda,
            v_min: self.problem.v_min,
            v_max: self.problem.v_max,
            d_min: [self.problem.d_min_a, self.problem.d_min_b],
            objective_value: self.solution.objective_value,
            converged: self.solution.converged,
            solve_time_ms: self.solution.solve_time,
            w: self.solution.w.clone(),
            v: self.solution.v.clone(),
            distances,
            basis: [self.basis_a().into(), self.basis_b().into()],
        }
    }
}

/// Blend profile and per-sample distances for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendDump {
    pub n: usize,
    pub lambda: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub d_min: [f64; 2],
    pub objective_value: f64,
    pub converged: bool,
    pub solve_time_ms: f64,
    pub w: Vec<[f64; 5]>,
    pub v: Vec<f64>,
    pub distances: Vec<[f64; 2]>,
    pub basis: [BasisSummary; 2],
}

#[derive(Debug, Clone)]
pub struct PlannedTransition {
    pub plan: TransitionPlan,
    pub trajectory: Trajectory,
    pub nominal_duration: f64,
    pub stretch_factor: f64,
    pub feasibility: FeasibilityReport,
    /// Worst clearance over the dense resample, meters.
    pub dense_clearance: f64,
    pub refinements: usize,
}

impl PlannedTransition {
    pub fn duration(&self) -> f64 {
        self.trajectory.duration
    }
}

/// Basis bulges tried in turn, as multiples of the subject spacing plus the
/// larger radius.
const BULGE_STEPS: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];

/// Solve the blend between two look-from points around the scene subjects.
///
/// When the spheres cover the whole segment between the two basis paths
/// somewhere, both paths are bulged outward mid-transition and the blend is
/// solved again.
pub fn plan_path(from: &CameraPose, to: &CameraPose, scene: &Scene, blend: &BlendConfig) -> Result<TransitionPlan> {
    let (basis_a, basis_b) = build_basis_paths(&from.look_from, &to.look_from, scene)?;
    let [a, b] = &scene.subjects;
    let reach = (a.position - b.position).norm() + a.safety_radius.max(b.safety_radius);
    let mut failure = None;
    for step in BULGE_STEPS {
        let bulge = step * reach;
        let problem = BlendProblem::new(
            basis_a.clone().with_bulge(bulge),
            basis_b.clone().with_bulge(bulge),
            a.safety_radius,
            b.safety_radius,
            blend,
        )?;
        let solution = match solve_blend(&problem) {
            Ok(s) => s,
            Err(Error::Infeasible(msg)) => {
                failure = Some(msg);
                continue;
            }
            Err(e) => return Err(e),
        };
        if bulge > 0.0 {
            log::info!("blend infeasible between the direct basis paths; bulged them by {bulge:.2} m");
        }
        let spline = BlendSpline::fit(&solution.w)?;
        return Ok(TransitionPlan {
            start: *from,
            end: *to,
            problem,
            solution,
            spline,
            easing: Easing::default(),
        });
    }
    Err(Error::Infeasible(failure.unwrap_or_default()))
}

/// Plan, time and stretch a transition between two camera poses.
pub fn plan_transition_poses(
    from: &CameraPose,
    to: &CameraPose,
    scene: &Scene,
    cfg: &TransitionConfig,
) -> Result<PlannedTransition> {
    scene.validate()?;
    cfg.limits.validate()?;
    if cfg.dense_factor == 0 || cfg.min_samples < 5 || !(cfg.sample_rate > 0.0) {
        return Err(Error::InvalidInput("invalid transition sampling configuration".into()));
    }
    let mut blend = cfg.blend.clone();
    let mut refinements = 0;
    loop {
        let plan = plan_path(from, to, scene, &blend)?;
        let nominal = match cfg.duration {
            Some(d) if d > 0.0 => d,
            Some(d) => return Err(Error::InvalidInput(format!("duration must be positive, got {d}"))),
            None => (plan.arc_length(1000) / (cfg.speed_fraction * cfg.limits.v_max)).max(cfg.min_duration),
        };
        let count = cfg.min_samples.max((nominal * cfg.sample_rate).ceil() as usize + 1);
        let dense = plan.dense_clearance(scene, cfg.dense_factor * (count - 1) + 1);
        if dense < -cfg.dense_tolerance {
            if refinements < cfg.max_refinements {
                log::info!(
                    "dense clearance {dense:.4} m below tolerance at n = {}; refining",
                    blend.samples
                );
                blend.samples *= 2;
                refinements += 1;
                continue;
            }
            return Err(Error::Infeasible(format!(
                "planned path clips a safety sphere by {:.3} m between blend samples",
                -dense
            )));
        }
        let raw = plan.sample(nominal, count);
        let stretched = dynamics::time_stretch(&raw, &cfg.limits, &cfg.stretch)?;
        return Ok(PlannedTransition {
            plan,
            trajectory: stretched.trajectory,
            nominal_duration: nominal,
            stretch_factor: stretched.factor,
            feasibility: stretched.report,
            dense_clearance: dense,
            refinements,
        });
    }
}

pub fn plan_transition(
    from: &FramedShot,
    to: &FramedShot,
    scene: &Scene,
    cfg: &TransitionConfig,
) -> Result<PlannedTransition> {
    plan_transition_poses(&from.pose, &to.pose, scene, cfg)
}
