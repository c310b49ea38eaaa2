//! Rotations from unconstrained parameters.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use super::GeometryError;

/// Norms below this are treated as degenerate.
pub const GRAM_SCHMIDT_EPS: f64 = 1e-9;

/// Orthonormalizes two vectors into a proper rotation matrix:
///
/// * row 0: `u' = u / ‖u‖`
/// * row 1: `v' = (v − (u'·v) u') / ‖·‖`
/// * row 2: `w' = u' × v'`
///
/// This maps a 6-parameter representation onto SO(3) smoothly, which is what
/// the pose optimizer differentiates through. The result is invariant to the
/// length of `u` and to adding multiples of `u` to `v`.
pub fn gram_schmidt(u: &Vector3<f64>, v: &Vector3<f64>) -> Result<Matrix3<f64>, GeometryError> {
    let nu = u.norm();
    if nu <= GRAM_SCHMIDT_EPS {
        return Err(GeometryError::DegenerateBasis);
    }
    let u1 = u / nu;
    let p = v - u1 * u1.dot(v);
    let np = p.norm();
    if np <= GRAM_SCHMIDT_EPS {
        return Err(GeometryError::DegenerateBasis);
    }
    let v1 = p / np;
    let w1 = u1.cross(&v1);
    Ok(Matrix3::from_rows(&[u1.transpose(), v1.transpose(), w1.transpose()]))
}

/// Backward pass of [`gram_schmidt`]: given `∂L/∂R` (gradient with respect to
/// the rotation's entries), returns `(∂L/∂u, ∂L/∂v)`.
///
/// Mirrors the forward computation step by step; validated against central
/// finite differences in the inference gradient tests.
pub(crate) fn gram_schmidt_backward(
    u: &Vector3<f64>,
    v: &Vector3<f64>,
    grad_r: &Matrix3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let nu = u.norm();
    let u1 = u / nu;
    let d = u1.dot(v);
    let p = v - u1 * d;
    let np = p.norm();
    let v1 = p / np;

    let mut g_u1: Vector3<f64> = grad_r.row(0).transpose();
    let mut g_v1: Vector3<f64> = grad_r.row(1).transpose();
    let g_w1: Vector3<f64> = grad_r.row(2).transpose();

    // w' = u' × v'
    g_u1 += v1.cross(&g_w1);
    g_v1 += g_w1.cross(&u1);

    // v' = p / ‖p‖
    let g_p = (g_v1 - v1 * v1.dot(&g_v1)) / np;

    // p = v − (u'·v) u'
    let g_v = g_p - u1 * u1.dot(&g_p);
    g_u1 += -v * g_p.dot(&u1) - g_p * d;

    // u' = u / ‖u‖
    let g_u = (g_u1 - u1 * u1.dot(&g_u1)) / nu;

    (g_u, g_v)
}

/// A rotation drawn uniformly from SO(3): four standard normal deviates
/// normalized into a unit quaternion.
pub fn uniform_random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if norm < 1e-6 {
            continue; // essentially impossible, but keep the math safe
        }
        let (w, x, y, z) = (q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm);
        return Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        );
    }
}
