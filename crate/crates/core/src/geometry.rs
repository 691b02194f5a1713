//! Small vector helpers shared by the planners.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// World up axis (z-up, ENU).
pub fn up() -> Vec3 {
    Vec3::z()
}

/// Horizontal component of `v`, not normalized.
pub fn horizontal(v: &Vec3) -> Vec3 {
    Vec3::new(v.x, v.y, 0.0)
}

pub fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

pub fn lerp_vec(a: &Vec3, b: &Vec3, t: f64) -> Vec3 {
    if t == 0.0 {
        *a
    } else if t == 1.0 {
        *b
    } else {
        a + (b - a) * t
    }
}

/// Rotate `v` about the unit `axis` by `angle` radians (Rodrigues).
pub fn rotate_about(v: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// Spherical interpolation between unit vectors.
///
/// `mid` supplies the great circle when the endpoints are antipodal: the arc
/// passes through the component of `mid` orthogonal to `from`. Callers must
/// ensure `mid` is not parallel to `from` in that case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slerp {
    from: Vec3,
    to: Vec3,
    /// Unit vector orthogonal to `from` in the plane of the arc.
    ortho: Vec3,
    angle: f64,
}

impl Slerp {
    pub fn new(from: Vec3, to: Vec3) -> Self {
        let axis = from.cross(&to);
        let sin = axis.norm();
        let angle = sin.atan2(from.dot(&to));
        let ortho = if sin > 0.0 { axis.cross(&from) / sin } else { Vec3::zeros() };
        Slerp { from, to, ortho, angle }
    }

    /// Arc through the half-way direction `mid` for antipodal endpoints.
    pub fn antipodal(from: Vec3, to: Vec3, mid: &Vec3) -> Self {
        let perp = mid - from * from.dot(mid);
        Slerp {
            from,
            to,
            ortho: perp.normalize(),
            angle: std::f64::consts::PI,
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn eval(&self, u: f64) -> Vec3 {
        if u == 0.0 {
            return self.from;
        }
        if u == 1.0 {
            return self.to;
        }
        if self.angle < 1e-6 {
            // nearly parallel: normalized lerp is exact to rounding here
            return (self.from + (self.to - self.from) * u).normalize();
        }
        let (s, c) = (u * self.angle).sin_cos();
        self.from * c + self.ortho * s
    }
}
