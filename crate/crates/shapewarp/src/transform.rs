//! Rigid (SE(3)) transforms stored as an explicit rotation matrix plus
//! translation. A plain matrix representation keeps the algebra close to how
//! poses are produced here (Gram-Schmidt rows, closed-form alignment) and
//! serializes without conversion loss.

use nalgebra::{Matrix3, Point3, Vector3};

/// How far from orthonormal a rotation matrix may be before construction fails.
pub const ROTATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("rotation matrix is not orthonormal with unit determinant (max deviation {deviation:.3e})")]
    NotARotation { deviation: f64 },
}

impl RigidTransform {
    /// Builds a transform, checking that `rotation` is a proper rotation:
    /// `RᵀR = I` and `det R = +1`, both within [`ROTATION_TOL`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, TransformError> {
        let gram = rotation.transpose() * rotation;
        let mut dev: f64 = (rotation.determinant() - 1.0).abs();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - target).abs());
            }
        }
        if dev > ROTATION_TOL {
            return Err(TransformError::NotARotation { deviation: dev });
        }
        Ok(Self { rotation, translation })
    }

    /// Builds a transform without the orthonormality check. For rotation
    /// matrices already produced by trusted constructions.
    pub fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self { rotation: Matrix3::identity(), translation }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform { rotation: rt, translation: -(rt * self.translation) }
    }

    /// Geodesic rotation distance to `other`, in radians (range `[0, π]`).
    pub fn rotation_angle_to(&self, other: &RigidTransform) -> f64 {
        rotation_angle(&(self.rotation.transpose() * other.rotation))
    }

    /// Euclidean distance between the two translations.
    pub fn translation_distance_to(&self, other: &RigidTransform) -> f64 {
        (self.translation - other.translation).norm()
    }
}

/// Rotation angle of a rotation matrix, in radians.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    // The skew part of a rotation has magnitude sin(θ) and the trace encodes
    // cos(θ); atan2 of the pair is well conditioned at both endpoints, unlike
    // acos of the trace alone, which cannot resolve angles below ~1e-8.
    let s = 0.5
        * Vector3::new(
            r[(2, 1)] - r[(1, 2)],
            r[(0, 2)] - r[(2, 0)],
            r[(1, 0)] - r[(0, 1)],
        )
        .norm();
    let c = (r.trace() - 1.0) / 2.0;
    s.atan2(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn rot_z(angle: f64) -> Matrix3<f64> {
        let (s, c) = angle.sin_cos();
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn rejects_reflections_and_skew() {
        let reflection = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(RigidTransform::new(reflection, Vector3::zeros()).is_err());
        let skew = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(RigidTransform::new(skew, Vector3::zeros()).is_err());
    }

    #[test]
    fn compose_and_inverse_round_trip() {
        let a = RigidTransform::new(rot_z(0.3), Vector3::new(1.0, -2.0, 0.5)).unwrap();
        let b = RigidTransform::new(rot_z(-1.1), Vector3::new(0.0, 4.0, 1.0)).unwrap();
        let p = Point3::new(0.2, 0.7, -0.4);
        let via_compose = a.compose(&b).apply(&p);
        let sequential = a.apply(&b.apply(&p));
        assert_abs_diff_eq!(via_compose, sequential, epsilon = 1e-14);

        let round_trip = a.inverse().apply(&a.apply(&p));
        assert_abs_diff_eq!(round_trip, p, epsilon = 1e-14);
    }

    #[test]
    fn angle_metric() {
        let a = RigidTransform::identity();
        let b = RigidTransform::new(rot_z(FRAC_PI_2), Vector3::zeros()).unwrap();
        assert_abs_diff_eq!(a.rotation_angle_to(&b), FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(a.rotation_angle_to(&a), 0.0, epsilon = 1e-7);
    }
}
