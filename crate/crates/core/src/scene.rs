//! Geometric domain types: subjects, camera poses, pinhole projection and
//! the line of action.
//!
//! World frame is right-handed, z-up, meters. Field of view is horizontal and
//! measured in degrees; the vertical extent follows from the aspect ratio.
//! Screen coordinates are normalized with the origin at the bottom-left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{up, Vec3};

/// Full body height in head-heights.
pub const HEADS_PER_BODY: f64 = 7.5;

pub const DEFAULT_ASPECT_RATIO: f64 = 16.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubjectId {
    A,
    B,
}

impl SubjectId {
    pub fn other(self) -> SubjectId {
        match self {
            SubjectId::A => SubjectId::B,
            SubjectId::B => SubjectId::A,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> char {
        match self {
            SubjectId::A => 'A',
            SubjectId::B => 'B',
        }
    }
}

/// A tracked person. `position` is the center of the head at eye level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectState {
    pub position: Vec3,
    pub gaze: Vec3,
    pub height: f64,
    pub safety_radius: f64,
}

impl SubjectState {
    /// Validates and normalizes the gaze.
    pub fn new(position: Vec3, gaze: Vec3, height: f64, safety_radius: f64) -> Result<Self> {
        let subject = SubjectState {
            position,
            gaze: gaze.normalize(),
            height,
            safety_radius,
        };
        subject.validate()?;
        Ok(subject)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("subject position must be finite".into()));
        }
        if !self.gaze.iter().all(|c| c.is_finite()) || (self.gaze.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("subject gaze must be a unit vector".into()));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::InvalidInput("subject height must be positive".into()));
        }
        if !(self.safety_radius > 0.0 && self.safety_radius.is_finite()) {
            return Err(Error::InvalidInput("safety radius must be positive".into()));
        }
        Ok(())
    }

    pub fn head_height(&self) -> f64 {
        self.height / HEADS_PER_BODY
    }
}

/// Orthonormal camera basis. `right` and `up` span the image plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrame {
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
}

impl CameraFrame {
    /// Frame for a roll-free camera looking along `direction`.
    pub fn looking(direction: &Vec3) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegeneratePose);
        }
        let forward = direction / norm;
        let side = forward.cross(&up());
        let side_norm = side.norm();
        if side_norm < 1e-9 {
            return Err(Error::DegeneratePose);
        }
        let right = side / side_norm;
        Ok(CameraFrame {
            forward,
            right,
            up: right.cross(&forward),
        })
    }
}

/// One framed shot: look-from, look-at and horizontal field of view (degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub look_from: Vec3,
    pub look_at: Vec3,
    pub fov: f64,
}

impl CameraPose {
    pub fn new(look_from: Vec3, look_at: Vec3, fov: f64) -> Result<Self> {
        let pose = CameraPose {
            look_from,
            look_at,
            fov,
        };
        pose.frame()?;
        if !(fov > 0.0 && fov < 180.0) {
            return Err(Error::InvalidInput(format!("field of view {fov} out of range")));
        }
        Ok(pose)
    }

    pub fn frame(&self) -> Result<CameraFrame> {
        CameraFrame::looking(&(self.look_at - self.look_from))
    }

    /// Tangent of half the horizontal and vertical field of view.
    pub fn half_extents(&self, aspect_ratio: f64) -> (f64, f64) {
        let tan_h = (self.fov.to_radians() / 2.0).tan();
        (tan_h, tan_h / aspect_ratio)
    }

    /// Gimbal pitch in degrees, negative when looking down.
    pub fn pitch(&self) -> f64 {
        let d = self.look_at - self.look_from;
        d.z.atan2(d.xy().norm()).to_degrees()
    }
}

/// Vertical field of view in degrees for a horizontal `fov` and aspect ratio.
pub fn vertical_fov(fov: f64, aspect_ratio: f64) -> f64 {
    2.0 * ((fov.to_radians() / 2.0).tan() / aspect_ratio).atan().to_degrees()
}

/// Normalized screen position, origin bottom-left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenPoint {
    pub x: f64,
    pub y: f64,
}

impl ScreenPoint {
    pub fn new(x: f64, y: f64) -> Self {
        ScreenPoint { x, y }
    }

    pub fn in_frame(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    /// Euclidean distance measured in frame widths.
    pub fn distance_in_widths(&self, other: &ScreenPoint, aspect_ratio: f64) -> f64 {
        let dx = self.x - other.x;
        let dy = (self.y - other.y) / aspect_ratio;
        dx.hypot(dy)
    }
}

/// Pinhole projection into normalized screen coordinates.
pub fn project(pose: &CameraPose, world_point: &Vec3, aspect_ratio: f64) -> Result<ScreenPoint> {
    let frame = pose.frame()?;
    project_with_frame(pose, &frame, world_point, aspect_ratio)
}

pub(crate) fn project_with_frame(
    pose: &CameraPose,
    frame: &CameraFrame,
    world_point: &Vec3,
    aspect_ratio: f64,
) -> Result<ScreenPoint> {
    let rel = world_point - pose.look_from;
    let depth = rel.dot(&frame.forward);
    if depth <= 0.0 {
        return Err(Error::BehindCamera);
    }
    let (tan_h, tan_v) = pose.half_extents(aspect_ratio);
    Ok(ScreenPoint {
        x: 0.5 + 0.5 * rel.dot(&frame.right) / (depth * tan_h),
        y: 0.5 + 0.5 * rel.dot(&frame.up) / (depth * tan_v),
    })
}

/// World point at view depth `depth` that projects to `screen`.
pub fn unproject(pose: &CameraPose, screen: &ScreenPoint, depth: f64, aspect_ratio: f64) -> Result<Vec3> {
    let frame = pose.frame()?;
    let (tan_h, tan_v) = pose.half_extents(aspect_ratio);
    let x = (screen.x - 0.5) * 2.0 * tan_h * depth;
    let y = (screen.y - 0.5) * 2.0 * tan_v * depth;
    Ok(pose.look_from + frame.forward * depth + frame.right * x + frame.up * y)
}

/// Which side of the line of action the camera stays on.
///
/// `Left` is the half-space of `up × (P_B − P_A)`: to the left of an observer
/// standing at subject A facing subject B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Unset,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOfAction {
    /// Unit vector from subject A to subject B.
    pub direction: Vec3,
    /// Horizontal unit normal pointing into the camera's half-space.
    pub side_normal: Vec3,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub subjects: [SubjectState; 2],
    /// Physical camera field of view, degrees.
    pub fov_max: f64,
    pub aspect_ratio: f64,
    pub line_of_action_side: Side,
}

impl Scene {
    pub fn new(a: SubjectState, b: SubjectState, fov_max: f64, aspect_ratio: f64) -> Result<Self> {
        let scene = Scene {
            subjects: [a, b],
            fov_max,
            aspect_ratio,
            line_of_action_side: Side::Unset,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.subjects {
            s.validate()?;
        }
        if !(self.fov_max > 0.0 && self.fov_max < 180.0) {
            return Err(Error::InvalidInput(format!("fov_max {} out of range", self.fov_max)));
        }
        if !(self.aspect_ratio > 0.0 && self.aspect_ratio.is_finite()) {
            return Err(Error::InvalidInput("aspect ratio must be positive".into()));
        }
        let delta = self.subjects[1].position - self.subjects[0].position;
        if delta.norm() <= 1e-6 {
            return Err(Error::DegenerateScene("subjects are coincident".into()));
        }
        if delta.xy().norm() <= 1e-6 {
            return Err(Error::DegenerateScene("line of action is vertical".into()));
        }
        Ok(())
    }

    pub fn subject(&self, id: SubjectId) -> &SubjectState {
        &self.subjects[id.index()]
    }

    /// Line of action with the side resolved from the gazes but not persisted.
    pub fn line_of_action_preview(&self) -> LineOfAction {
        let direction = (self.subjects[1].position - self.subjects[0].position).normalize();
        let left = up().cross(&direction).normalize();
        let side = match self.line_of_action_side {
            Side::Unset => {
                let gaze_sum = self.subjects[0].gaze + self.subjects[1].gaze;
                if gaze_sum.dot(&left) >= -1e-12 {
                    Side::Left
                } else {
                    Side::Right
                }
            }
            persisted => persisted,
        };
        let side_normal = if side == Side::Right { -left } else { left };
        LineOfAction {
            direction,
            side_normal,
            side,
        }
    }

    /// Line of action; the first call persists the side that sees more faces.
    pub fn line_of_action(&mut self) -> LineOfAction {
        let line = self.line_of_action_preview();
        self.line_of_action_side = line.side;
        line
    }

    pub fn distance_to_subjects(&self, p: &Vec3) -> (f64, f64) {
        (
            (p - self.subjects[0].position).norm(),
            (p - self.subjects[1].position).norm(),
        )
    }

    /// Signed clearance `|p − P_i| − r_i` to the nearer safety sphere.
    pub fn clearance(&self, p: &Vec3) -> f64 {
        let (da, db) = self.distance_to_subjects(p);
        (da - self.subjects[0].safety_radius).min(db - self.subjects[1].safety_radius)
    }

    /// Copy with both safety radii grown by `margin` meters.
    pub fn with_margin(&self, margin: f64) -> Scene {
        let mut scene = self.clone();
        for s in &mut scene.subjects {
            s.safety_radius += margin;
        }
        scene
    }

    pub fn from_json(text: &str) -> Result<Scene> {
        let file: SceneFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("scene schema: {e}")))?;
        file.into_scene()
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            subjects: self
                .subjects
                .iter()
                .map(|s| SubjectFile {
                    position: s.position.into(),
                    gaze: s.gaze.into(),
                    height: s.height,
                    safety_radius: s.safety_radius,
                })
                .collect(),
            fov_max_deg: self.fov_max,
            aspect_ratio: Some(self.aspect_ratio),
            line_of_action_side: self.line_of_action_side,
        }
    }
}

/// On-disk scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub subjects: Vec<SubjectFile>,
    pub fov_max_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "side_is_unset")]
    pub line_of_action_side: Side,
}

fn side_is_unset(side: &Side) -> bool {
    *side == Side::Unset
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectFile {
    pub position: [f64; 3],
    pub gaze: [f64; 3],
    pub height: f64,
    pub safety_radius: f64,
}

impl SceneFile {
    pub fn into_scene(self) -> Result<Scene> {
        if self.subjects.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "scene schema: exactly 2 subjects required, got {}",
                self.subjects.len()
            )));
        }
        let mut subjects = Vec::with_capacity(2);
        for s in &self.subjects {
            let gaze = Vec3::from(s.gaze);
            if !(gaze.norm() > 0.0) {
                return Err(Error::InvalidInput("scene schema: gaze must be non-zero".into()));
            }
            subjects.push(SubjectState::new(s.position.into(), gaze, s.height, s.safety_radius)?);
        }
        let mut scene = Scene::new(
            subjects[0],
            subjects[1],
            self.fov_max_deg,
            self.aspect_ratio.unwrap_or(DEFAULT_ASPECT_RATIO),
        )?;
        scene.line_of_action_side = self.line_of_action_side;
        Ok(scene)
    }
}
