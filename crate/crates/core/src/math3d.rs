//! Small 3D math kit: vectors, row-major 3x3 matrices, rigid transforms.
//!
//! Hand-rolled on purpose — everything here serializes naturally to JSON and
//! the whole crate needs nothing beyond rotations, rigid transforms and
//! segment distance queries.

use serde::{Deserialize, Serialize};

/// 3D vector / point, meters unless stated otherwise.
pub type Vec3 = [f64; 3];

/// Row-major 3x3 matrix.
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Normalize; returns `None` for (near-)zero vectors.
pub fn normalize(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    if n < 1e-12 {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in a.iter().enumerate() {
        for j in 0..3 {
            out[i][j] = row[0] * b[0][j] + row[1] * b[1][j] + row[2] * b[2][j];
        }
    }
    out
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Rotation by `angle` radians about a unit `axis` (Rodrigues form).
pub fn rotation_about_axis(axis: Vec3, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let [x, y, z] = axis;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// Rigid transform `p ↦ R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    /// Row-major rotation matrix.
    pub rotation: Mat3,
    /// Translation, meters.
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self { rotation: IDENTITY, translation: [0.0; 3] }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        add(mat_vec(&self.rotation, p), self.translation)
    }

    /// Analytic inverse `(Rᵀ, −Rᵀ t)`; valid while `rotation` is orthonormal.
    pub fn inverse(&self) -> Self {
        let rt = transpose(&self.rotation);
        Self { rotation: rt, translation: scale(mat_vec(&rt, self.translation), -1.0) }
    }

    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self {
            rotation: mat_mul(&self.rotation, &other.rotation),
            translation: add(mat_vec(&self.rotation, other.translation), self.translation),
        }
    }

    /// Max deviation of `RᵀR` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let rtr = mat_mul(&transpose(&self.rotation), &self.rotation);
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((rtr[i][j] - target).abs());
            }
        }
        err
    }
}

/// Closest distance between segments `[a0, a1]` and `[b0, b1]`.
///
/// Handles degenerate (zero-length) segments. Clamped quadratic minimization,
/// the standard Ericson formulation.
pub fn segment_segment_distance(a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> f64 {
    let d1 = sub(a1, a0);
    let d2 = sub(b1, b0);
    let r = sub(a0, b0);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);

    let (s, t);
    if a <= 1e-18 && e <= 1e-18 {
        return norm(r);
    }
    if a <= 1e-18 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(d1, r);
        if e <= 1e-18 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(d1, d2);
            let denom = a * e - b * b;
            let mut s_ = if denom > 1e-18 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t_ = (b * s_ + f) / e;
            if t_ < 0.0 {
                t_ = 0.0;
                s_ = (-c / a).clamp(0.0, 1.0);
            } else if t_ > 1.0 {
                t_ = 1.0;
                s_ = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s_;
            t = t_;
        }
    }
    let pa = add(a0, scale(d1, s));
    let pb = add(b0, scale(d2, t));
    norm(sub(pa, pb))
}

/// Closest distance from the ray `origin + t·dir, t ≥ 0` to segment `[b0, b1]`,
/// along with the parameter `t` of the closest ray point (in units of `dir`,
/// so a direction with unit z gives z-depth directly).
pub fn ray_segment_distance(origin: Vec3, dir: Vec3, b0: Vec3, b1: Vec3) -> (f64, f64) {
    // Treat the ray as a long segment; generated scenes live within ~100 m.
    let far = add(origin, scale(dir, 1e4));
    let d1 = sub(far, origin);
    let d2 = sub(b0, b1);

    // Minimize |a0 + s d1 - (b1 + t d2)|^2 over s in [0,1], t in [0,1].
    let r = sub(origin, b1);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let b = dot(d1, d2);
    let c = dot(d1, r);
    let f = dot(d2, r);

    let (mut s, mut t);
    if e <= 1e-18 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else {
        let denom = a * e - b * b;
        s = if denom > 1e-18 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
        t = (b * s + f) / e;
        if t < 0.0 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else if t > 1.0 {
            t = 1.0;
            s = ((b - c) / a).clamp(0.0, 1.0);
        }
    }
    let pa = add(origin, scale(d1, s));
    let pb = add(b1, scale(d2, t));
    (norm(sub(pa, pb)), s * 1e4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_about_z_quarter_turn() {
        let r = rotation_about_axis([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        let p = mat_vec(&r, [1.0, 0.0, 0.0]);
        assert!((p[0]).abs() < 1e-12);
        assert!((p[1] - 1.0).abs() < 1e-12);
        assert!((p[2]).abs() < 1e-12);
    }

    #[test]
    fn rigid_transform_round_trip() {
        let r = rotation_about_axis([0.0, 1.0, 0.0], 0.7);
        let t = RigidTransform { rotation: r, translation: [0.3, -0.2, 1.5] };
        let p = [0.1, 0.4, -0.9];
        let q = t.inverse().apply(t.apply(p));
        for i in 0..3 {
            assert!((q[i] - p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn segment_distance_parallel_overlap() {
        let d = segment_segment_distance(
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        );
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn segment_distance_skew() {
        // Perpendicular skew segments separated by 1 along z.
        let d = segment_segment_distance(
            [-1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, -1.0, 1.0],
            [0.0, 1.0, 1.0],
        );
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_distance_degenerate_points() {
        let d = segment_segment_distance(
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
            [3.0, 4.0, 0.0],
            [3.0, 4.0, 0.0],
        );
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ray_segment_hits_capsule_axis() {
        let (d, depth) =
            ray_segment_distance([0.0; 3], [0.0, 0.0, 1.0], [-1.0, 0.0, 2.0], [1.0, 0.0, 2.0]);
        assert!(d.abs() < 1e-9);
        assert!((depth - 2.0).abs() < 1e-6);
    }
}
