use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{horizontal, lerp, up, Slerp, Vec3};
use crate::scene::{Scene, SubjectId};

/// Subject-relative camera path: distance to the subject interpolated
/// linearly, vantage direction interpolated spherically.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPath {
    pub subject: SubjectId,
    pub subject_position: Vec3,
    pub d0: f64,
    pub d1: f64,
    pub v0: Vec3,
    pub v1: Vec3,
    /// Extra distance `bulge · 4u(1 − u)` added mid-path.
    pub bulge: f64,
    start: Vec3,
    end: Vec3,
    slerp: Slerp,
    antipodal: bool,
}

impl BasisPath {
    pub fn new(subject: SubjectId, subject_position: Vec3, start: Vec3, end: Vec3, side_normal: &Vec3) -> Self {
        let r0 = start - subject_position;
        let r1 = end - subject_position;
        let (d0, d1) = (r0.norm(), r1.norm());
        let (v0, v1) = (r0 / d0, r1 / d1);
        let antipodal = v0.dot(&v1) <= -1.0 + 1e-9;
        let slerp = if antipodal {
            let mid = antipodal_midway(&v0, side_normal);
            log::info!(
                "antipodal vantage around subject {}: arc routed through {:?}",
                subject.label(),
                mid.as_slice()
            );
            Slerp::antipodal(v0, v1, &mid)
        } else {
            Slerp::new(v0, v1)
        };
        BasisPath {
            subject,
            subject_position,
            d0,
            d1,
            v0,
            v1,
            bulge: 0.0,
            start,
            end,
            slerp,
            antipodal,
        }
    }

    /// The same path pushed away from the subject by up to `bulge` meters at
    /// `u = ½`; the endpoints stay put.
    pub fn with_bulge(self, bulge: f64) -> Self {
        BasisPath { bulge, ..self }
    }

    /// True when the endpoint vantages were antipodal and the arc had to be
    /// chosen explicitly.
    pub fn antipodal(&self) -> bool {
        self.antipodal
    }

    pub fn distance(&self, u: f64) -> f64 {
        lerp(self.d0, self.d1, u) + self.bulge * 4.0 * u * (1.0 - u)
    }

    pub fn vantage(&self, u: f64) -> Vec3 {
        self.slerp.eval(u)
    }

    pub fn eval(&self, u: f64) -> Vec3 {
        if u == 0.0 || self.start == self.end {
            return self.start;
        }
        if u == 1.0 {
            return self.end;
        }
        self.subject_position + self.vantage(u) * self.distance(u)
    }
}

/// Half-way direction for an antipodal swing: toward the camera side of the
/// line of action, or any horizontal perpendicular when that is parallel.
fn antipodal_midway(v0: &Vec3, side_normal: &Vec3) -> Vec3 {
    let toward_side = side_normal - v0 * v0.dot(side_normal);
    if toward_side.norm() > 1e-6 {
        return toward_side.normalize();
    }
    let perp = up().cross(v0);
    if perp.norm() > 1e-6 {
        return perp.normalize();
    }
    horizontal(side_normal).normalize()
}

/// Verify both cameras are outside both safety spheres.
pub fn check_endpoint(camera: &Vec3, scene: &Scene) -> Result<()> {
    for (id, s) in [SubjectId::A, SubjectId::B].iter().zip(&scene.subjects) {
        let distance = (camera - s.position).norm();
        if distance < s.safety_radius - 1e-6 {
            return Err(Error::UnsafeEndpoint {
                subject: id.label(),
                distance,
                radius: s.safety_radius,
            });
        }
    }
    Ok(())
}

/// Basis paths around subject A and subject B between two camera positions.
pub fn build_basis_paths(c0: &Vec3, c1: &Vec3, scene: &Scene) -> Result<(BasisPath, BasisPath)> {
    check_endpoint(c0, scene)?;
    check_endpoint(c1, scene)?;
    let side = scene.line_of_action_preview().side_normal;
    let [a, b] = &scene.subjects;
    Ok((
        BasisPath::new(SubjectId::A, a.position, *c0, *c1, &side),
        BasisPath::new(SubjectId::B, b.position, *c0, *c1, &side),
    ))
}

/// Serializable description of a basis path for debug dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSummary {
    pub subject: SubjectId,
    pub d0: f64,
    pub d1: f64,
    pub v0: Vec3,
    pub v1: Vec3,
    pub antipodal: bool,
    #[serde(default)]
    pub bulge: f64,
}

impl From<&BasisPath> for BasisSummary {
    fn from(p: &BasisPath) -> Self {
        BasisSummary {
            subject: p.subject,
            d0: p.d0,
            d1: p.d1,
            v0: p.v0,
            v1: p.v1,
            antipodal: p.antipodal,
            bulge: p.bulge,
        }
    }
}
