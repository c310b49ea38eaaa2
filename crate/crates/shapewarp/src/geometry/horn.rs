//! Closed-form rigid alignment of corresponding point pairs.

use nalgebra::{Matrix3, Matrix4};

use super::GeometryError;
use crate::cloud::PointCloud;
use crate::transform::RigidTransform;

/// Relative threshold on the second eigenvalue of the source scatter below
/// which the configuration cannot pin down a rotation.
const COLLINEARITY_TOL: f64 = 1e-12;

/// Finds the rigid transform `(R, t)` minimizing `Σ_j ‖R·source_j + t − target_j‖²`
/// over paired points, via the unit-quaternion eigenvalue formulation: the
/// optimal quaternion is the dominant eigenvector of a 4×4 symmetric matrix
/// assembled from the centered cross-covariance. No scaling, no reflection.
pub fn horn_align(source: &PointCloud, target: &PointCloud) -> Result<RigidTransform, GeometryError> {
    if source.len() != target.len() {
        return Err(GeometryError::PairCountMismatch {
            from_len: source.len(),
            to_len: target.len(),
        });
    }
    let n = source.len();
    if n < 3 {
        return Err(GeometryError::DegenerateConfiguration);
    }

    let sc = source.centroid();
    let tc = target.centroid();

    // Cross-covariance of centered pairs, plus source scatter for the
    // degeneracy check.
    let mut m = Matrix3::<f64>::zeros();
    let mut scatter = Matrix3::<f64>::zeros();
    for j in 0..n {
        let a = source[j].coords - sc;
        let b = target[j].coords - tc;
        m += a * b.transpose();
        scatter += a * a.transpose();
    }

    let mut eig = scatter.symmetric_eigen().eigenvalues;
    eig.as_mut_slice().sort_by(|x, y| y.partial_cmp(x).unwrap());
    if eig[1] <= COLLINEARITY_TOL * eig[0].max(f64::MIN_POSITIVE) {
        return Err(GeometryError::DegenerateConfiguration);
    }

    let (sxx, sxy, sxz) = (m[(0, 0)], m[(0, 1)], m[(0, 2)]);
    let (syx, syy, syz) = (m[(1, 0)], m[(1, 1)], m[(1, 2)]);
    let (szx, szy, szz) = (m[(2, 0)], m[(2, 1)], m[(2, 2)]);
    #[rustfmt::skip]
    let n_mat = Matrix4::new(
        sxx + syy + szz, syz - szy,        szx - sxz,        sxy - syx,
        syz - szy,       sxx - syy - szz,  sxy + syx,        szx + sxz,
        szx - sxz,       sxy + syx,       -sxx + syy - szz,  syz + szy,
        sxy - syx,       szx + sxz,        syz + szy,       -sxx - syy + szz,
    );

    let eigen = n_mat.symmetric_eigen();
    let mut best = 0;
    for i in 1..4 {
        if eigen.eigenvalues[i] > eigen.eigenvalues[best] {
            best = i;
        }
    }
    let q = eigen.eigenvectors.column(best);
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    let rotation = Matrix3::new(
        w * w + x * x - y * y - z * z,
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        w * w - x * x + y * y - z * z,
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        w * w - x * x - y * y + z * z,
    );
    let translation = tc - rotation * sc;
    Ok(RigidTransform::from_parts_unchecked(rotation, translation))
}
