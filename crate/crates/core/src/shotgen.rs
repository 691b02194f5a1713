//! Static shot generation for the canonical two-subject shot types.
//!
//! A shot is placed in three steps: an approximate look-at on the line of
//! action with the look-from offset by yaw, pitch and distance; a rigid
//! translation of both points until the framing target lands on its
//! rule-of-thirds goal; and, when the camera sits inside a safety sphere, a
//! push-out along the view ray with a compensating crop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{horizontal, up, Vec3};
use crate::scene::{
    project_with_frame, vertical_fov, CameraFrame, CameraPose, Scene, ScreenPoint, SubjectId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotType {
    Apex,
    CloseApex,
    Internal,
    External,
    ApexFromAbove,
    ExternalFromAbove,
}

impl ShotType {
    pub const ALL: [ShotType; 6] = [
        ShotType::Apex,
        ShotType::CloseApex,
        ShotType::Internal,
        ShotType::External,
        ShotType::ApexFromAbove,
        ShotType::ExternalFromAbove,
    ];

    pub fn default_distance(self) -> DistanceClass {
        match self {
            ShotType::Apex | ShotType::ApexFromAbove => DistanceClass::Long,
            ShotType::CloseApex | ShotType::External | ShotType::ExternalFromAbove => {
                DistanceClass::Medium
            }
            ShotType::Internal => DistanceClass::Close,
        }
    }

    /// Both subjects are framing targets.
    pub fn frames_both(self) -> bool {
        matches!(self, ShotType::Apex | ShotType::CloseApex | ShotType::ApexFromAbove)
    }

    pub fn from_above(self) -> bool {
        matches!(self, ShotType::ApexFromAbove | ShotType::ExternalFromAbove)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceClass {
    Close,
    Medium,
    Long,
}

impl DistanceClass {
    /// Head-heights below the eye line that fill the frame.
    pub fn heads(self) -> f64 {
        match self {
            DistanceClass::Close => 2.5,
            DistanceClass::Medium => 4.0,
            DistanceClass::Long => 7.5,
        }
    }
}

/// Canonical shot request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotSpec {
    pub shot_type: ShotType,
    #[serde(default = "default_primary")]
    pub primary_subject: SubjectId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_class: Option<DistanceClass>,
    /// Yaw relative to the line of action, degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    /// Camera pitch, degrees, negative looking down.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_deg: Option<f64>,
}

fn default_primary() -> SubjectId {
    SubjectId::A
}

impl ShotSpec {
    pub fn new(shot_type: ShotType, primary_subject: SubjectId) -> Self {
        ShotSpec {
            shot_type,
            primary_subject,
            distance_class: None,
            theta_deg: None,
            phi_deg: None,
        }
    }

    pub fn distance(&self) -> DistanceClass {
        self.distance_class.unwrap_or(self.shot_type.default_distance())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(class) = self.distance_class
            && class != self.shot_type.default_distance() {
                return Err(Error::InvalidInput(format!(
                    "{:?} shots use {:?} distance, got {:?}",
                    self.shot_type,
                    self.shot_type.default_distance(),
                    class
                )));
            }
        if let Some(theta) = self.theta_deg
            && !(theta > 0.0 && theta < 180.0) {
                return Err(Error::InvalidInput(format!("theta {theta} must lie in (0, 180)")));
            }
        if let Some(phi) = self.phi_deg
            && !(phi.abs() < 89.0) {
                return Err(Error::InvalidInput(format!("phi {phi} must lie in (-89, 89)")));
            }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<ShotSpec> {
        let spec: ShotSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("shot schema: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShotConfig {
    pub apex_theta_deg: f64,
    pub external_theta_deg: f64,
    /// Internal shots sit this far off the primary's gaze, toward the camera side.
    pub internal_gaze_offset_deg: f64,
    /// Derived yaws are kept this far from the line of action.
    pub min_theta_deg: f64,
    pub from_above_phi_deg: f64,
    /// `crop_warning` fires below this fraction of `fov_max`.
    pub crop_warning_ratio: f64,
    pub shift_tolerance: f64,
    pub max_shift_iterations: usize,
}

impl Default for ShotConfig {
    fn default() -> Self {
        ShotConfig {
            apex_theta_deg: 90.0,
            external_theta_deg: 20.0,
            internal_gaze_offset_deg: 30.0,
            min_theta_deg: 20.0,
            from_above_phi_deg: -55.0,
            crop_warning_ratio: 0.33,
            shift_tolerance: 1e-4,
            max_shift_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FramingTarget {
    A,
    B,
    /// Average eye position of both subjects.
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint {
    pub target: FramingTarget,
    pub world: Vec3,
    pub screen: ScreenPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramedShot {
    pub spec: ShotSpec,
    pub pose: CameraPose,
    pub uncropped_fov: f64,
    pub crop_warning: bool,
    /// View depth of the framing target before and after any push-out.
    pub ideal_distance: f64,
    pub safe_distance: f64,
    pub target_screen_points: Vec<TargetPoint>,
}

impl FramedShot {
    pub fn pushed_out(&self) -> bool {
        self.safe_distance > self.ideal_distance
    }

    pub fn fov_ratio(&self, fov_max: f64) -> f64 {
        self.pose.fov / fov_max
    }
}

/// Camera-to-target distance at which `distance_class` head-heights fill the
/// frame below an eye line on the upper third.
pub fn distance_for_class(
    distance_class: DistanceClass,
    head_height: f64,
    fov: f64,
    aspect_ratio: f64,
) -> f64 {
    let tan_v = (vertical_fov(fov, aspect_ratio).to_radians() / 2.0).tan();
    distance_class.heads() * head_height / (2.0 * tan_v * (2.0 / 3.0))
}

/// Screen height, in normalized units, of a head-height segment hanging below
/// `point` (eye level).
pub fn projected_head_height(
    pose: &CameraPose,
    point: &Vec3,
    head_height: f64,
    aspect_ratio: f64,
) -> Result<f64> {
    let frame = pose.frame()?;
    let top = project_with_frame(pose, &frame, point, aspect_ratio)?;
    let bottom = project_with_frame(pose, &frame, &(point - up() * head_height), aspect_ratio)?;
    Ok((top.y - bottom.y).abs())
}

/// Distance the camera must retreat along `-forward` to clear every sphere.
fn push_out_distance(look_from: &Vec3, forward: &Vec3, scene: &Scene) -> f64 {
    let mut t = 0.0;
    for _ in 0..8 {
        let mut moved = false;
        for s in &scene.subjects {
            let w = look_from - forward * t - s.position;
            let r = s.safety_radius;
            if w.norm() < r {
                let w0 = look_from - s.position;
                let b = w0.dot(forward);
                let disc = (b * b - w0.norm_squared() + r * r).max(0.0);
                let exit = b + disc.sqrt();
                t = exit.max(t) + 1e-9;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    t
}

/// Signed angle of a horizontal direction in the (along, side) frame, degrees.
fn yaw_in_frame(dir: &Vec3, along: &Vec3, side: &Vec3) -> f64 {
    dir.dot(side).atan2(dir.dot(along)).to_degrees()
}

fn internal_theta(gaze: &Vec3, along: &Vec3, side: &Vec3, cfg: &ShotConfig) -> f64 {
    let gaze_h = horizontal(gaze);
    if gaze_h.norm() < 1e-6 {
        return 90.0;
    }
    let beta = yaw_in_frame(&gaze_h, along, side);
    // rotate toward the perpendicular on the camera side by the shortest path
    let mut delta = 90.0 - beta;
    if delta > 180.0 {
        delta -= 360.0;
    } else if delta <= -180.0 {
        delta += 360.0;
    }
    let theta = beta + delta.signum() * cfg.internal_gaze_offset_deg.min(delta.abs());
    wrap_theta(theta).clamp(cfg.min_theta_deg, 180.0 - cfg.min_theta_deg)
}

fn wrap_theta(theta: f64) -> f64 {
    let mut t = theta % 360.0;
    if t > 180.0 {
        t -= 360.0;
    } else if t <= -180.0 {
        t += 360.0;
    }
    t
}

/// Place a static camera for `spec`. The line-of-action side is taken from
/// the scene, or resolved from the gazes without persisting it.
pub fn place_shot(scene: &Scene, spec: &ShotSpec, cfg: &ShotConfig) -> Result<FramedShot> {
    spec.validate()?;
    scene.validate()?;
    let line = scene.line_of_action_preview();
    let side = line.side_normal;
    let fov = scene.fov_max;
    let aspect = scene.aspect_ratio;

    let (target_kind, target, along, head_height, default_theta) = if spec.shot_type.frames_both() {
        let [a, b] = &scene.subjects;
        let along = horizontal(&line.direction).normalize();
        (
            FramingTarget::Midpoint,
            (a.position + b.position) / 2.0,
            along,
            (a.head_height() + b.head_height()) / 2.0,
            cfg.apex_theta_deg,
        )
    } else {
        let primary = scene.subject(spec.primary_subject);
        let other = scene.subject(spec.primary_subject.other());
        let along = horizontal(&(other.position - primary.position)).normalize();
        let theta = match spec.shot_type {
            ShotType::Internal => internal_theta(&primary.gaze, &along, &side, cfg),
            _ => cfg.external_theta_deg,
        };
        let kind = match spec.primary_subject {
            SubjectId::A => FramingTarget::A,
            SubjectId::B => FramingTarget::B,
        };
        (kind, primary.position, along, primary.head_height(), theta)
    };

    let theta = spec.theta_deg.unwrap_or(default_theta).to_radians();
    let phi = spec
        .phi_deg
        .unwrap_or(if spec.shot_type.from_above() { cfg.from_above_phi_deg } else { 0.0 })
        .to_radians();
    let distance = distance_for_class(spec.distance(), head_height, fov, aspect);

    let yaw_dir = along * theta.cos() + side * theta.sin();
    let offset = yaw_dir * (-phi).cos() + up() * (-phi).sin();
    let frame = CameraFrame::looking(&(-offset))?;

    let goal = if spec.shot_type.frames_both() {
        ScreenPoint::new(0.5, 2.0 / 3.0)
    } else {
        let primary = scene.subject(spec.primary_subject);
        let other = scene.subject(spec.primary_subject.other());
        let on_left = match spec.shot_type {
            // facing screen right puts the subject on the left third
            ShotType::Internal => primary.gaze.dot(&frame.right) >= 0.0,
            _ => (primary.position - other.position).dot(&frame.right) <= 0.0,
        };
        ScreenPoint::new(if on_left { 1.0 / 3.0 } else { 2.0 / 3.0 }, 2.0 / 3.0)
    };

    let mut pose = CameraPose {
        look_from: target + offset * distance,
        look_at: target,
        fov,
    };
    let (tan_h, tan_v) = pose.half_extents(aspect);
    let mut converged = false;
    for _ in 0..cfg.max_shift_iterations {
        let actual = project_with_frame(&pose, &frame, &target, aspect)?;
        let (ex, ey) = (goal.x - actual.x, goal.y - actual.y);
        if ex.abs().max(ey.abs()) < cfg.shift_tolerance {
            converged = true;
            break;
        }
        let depth = (target - pose.look_from).dot(&frame.forward);
        let delta = -(frame.right * (ex * 2.0 * tan_h * depth) + frame.up * (ey * 2.0 * tan_v * depth));
        pose.look_from += delta;
        pose.look_at += delta;
    }
    if !converged {
        return Err(Error::UnreachableFraming {
            iterations: cfg.max_shift_iterations,
        });
    }

    let ideal_distance = (target - pose.look_from).dot(&frame.forward);
    let push = push_out_distance(&pose.look_from, &frame.forward, scene);
    let mut safe_distance = ideal_distance;
    let mut goal = goal;
    if push > 0.0 {
        let ideal = pose;
        pose.look_from -= frame.forward * push;
        safe_distance = ideal_distance + push;
        // screen span scales with 1/tan(fov/2) at a fixed pose, so this crop
        // restores the head height exactly; on tilted views the target then
        // drifts slightly off its goal
        let ratio = match (
            projected_head_height(&ideal, &target, head_height, aspect),
            projected_head_height(&pose, &target, head_height, aspect),
        ) {
            (Ok(before), Ok(after)) if before > 0.0 => after / before,
            _ => ideal_distance / safe_distance,
        };
        let half = ratio * (fov.to_radians() / 2.0).tan();
        pose.fov = 2.0 * half.atan().to_degrees();
        goal = project_with_frame(&pose, &frame, &target, aspect)?;
    }

    Ok(FramedShot {
        spec: *spec,
        pose,
        uncropped_fov: fov,
        crop_warning: pose.fov / scene.fov_max < cfg.crop_warning_ratio,
        ideal_distance,
        safe_distance,
        target_screen_points: vec![TargetPoint {
            target: target_kind,
            world: target,
            screen: goal,
        }],
    })
}
