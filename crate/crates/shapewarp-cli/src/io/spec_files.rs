//! JSON spec/estimate files. All lengths are meters and all angles radians;
//! the unit strings are embedded so files are self-describing. Rotations are
//! stored as 9 row-major floats plus a redundant unit quaternion; loaders
//! verify the two agree to 1e-9 before accepting a file.

use std::path::Path;

use nalgebra::{Matrix3, Point3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use shapewarp::interaction::{GraspSpec, PlacementSpec, VirtualAnchor};
use shapewarp::transform::RigidTransform;
use shapewarp::inference::ShapePoseEstimate;
use shapewarp::warp::ShapeParams;

use super::{malformed, FileFormatError};

pub const LENGTH_UNITS: &str = "meters";
pub const ANGLE_UNITS: &str = "radians";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationJson {
    pub matrix_row_major: [f64; 9],
    pub quaternion_wxyz: [f64; 4],
}

impl RotationJson {
    pub fn from_matrix(r: &Matrix3<f64>) -> Self {
        let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
        RotationJson {
            matrix_row_major: [
                r.m11, r.m12, r.m13, r.m21, r.m22, r.m23, r.m31, r.m32, r.m33,
            ],
            quaternion_wxyz: [q.w, q.i, q.j, q.k],
        }
    }

    /// Rebuilds the matrix, checking orthonormality and that the redundant
    /// quaternion encodes the same rotation to 1e-9.
    pub fn to_matrix(&self, path: &Path) -> Result<Matrix3<f64>, FileFormatError> {
        let m = &self.matrix_row_major;
        let r = Matrix3::new(m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8]);
        let [w, x, y, z] = self.quaternion_wxyz;
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(malformed(
                path,
                format!("quaternion norm {norm} is not 1 within 1e-9"),
            ));
        }
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(w, x, y, z));
        let rq = q.to_rotation_matrix();
        let disagreement = (r - rq.matrix())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if disagreement > 1e-9 {
            return Err(malformed(
                path,
                format!("rotation matrix and quaternion disagree by {disagreement:.3e} (> 1e-9)"),
            ));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformJson {
    pub rotation: RotationJson,
    pub translation_m: [f64; 3],
}

impl TransformJson {
    pub fn from_transform(t: &RigidTransform) -> Self {
        let tr = t.translation();
        TransformJson {
            rotation: RotationJson::from_matrix(t.rotation()),
            translation_m: [tr.x, tr.y, tr.z],
        }
    }

    pub fn to_transform(&self, path: &Path) -> Result<RigidTransform, FileFormatError> {
        let r = self.rotation.to_matrix(path)?;
        let t = Vector3::new(
            self.translation_m[0],
            self.translation_m[1],
            self.translation_m[2],
        );
        RigidTransform::new(r, t).map_err(|e| malformed(path, e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraspSpecFile {
    pub length_units: String,
    pub angle_units: String,
    pub pair_count: usize,
    pub contact_eps_m: f64,
    pub seed: u64,
    pub contact_indices: Vec<usize>,
    pub gripper_points_local_m: Vec<[f64; 3]>,
    pub demo_grasp: TransformJson,
}

impl GraspSpecFile {
    pub fn from_spec(spec: &GraspSpec, contact_eps: f64, seed: u64) -> Self {
        GraspSpecFile {
            length_units: LENGTH_UNITS.into(),
            angle_units: ANGLE_UNITS.into(),
            pair_count: spec.pair_count(),
            contact_eps_m: contact_eps,
            seed,
            contact_indices: spec.contact_indices.clone(),
            gripper_points_local_m: spec
                .gripper_points_local
                .iter()
                .map(|p| [p.x, p.y, p.z])
                .collect(),
            demo_grasp: TransformJson::from_transform(&spec.demo_grasp),
        }
    }

    pub fn to_spec(&self, path: &Path) -> Result<GraspSpec, FileFormatError> {
        if self.contact_indices.len() != self.gripper_points_local_m.len() {
            return Err(malformed(
                path,
                "contact_indices and gripper_points_local_m lengths differ",
            ));
        }
        if self.contact_indices.len() != self.pair_count {
            return Err(malformed(path, "pair_count does not match the pair lists"));
        }
        Ok(GraspSpec {
            contact_indices: self.contact_indices.clone(),
            gripper_points_local: self
                .gripper_points_local_m
                .iter()
                .map(|c| Point3::new(c[0], c[1], c[2]))
                .collect(),
            demo_grasp: self.demo_grasp.to_transform(path)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlacementAnchorJson {
    pub target_index: usize,
    pub neighbor_indices: Vec<usize>,
    pub displacements_m: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlacementSpecFile {
    pub length_units: String,
    pub pair_count: usize,
    pub delta_m: f64,
    pub neighbor_count: usize,
    pub seed: u64,
    pub anchors: Vec<PlacementAnchorJson>,
    /// Max distance between each virtual point and its stored target when
    /// re-evaluated on the extraction clouds; recomputed at record time.
    pub virtual_point_max_error_m: f64,
}

impl PlacementSpecFile {
    pub fn from_spec(spec: &PlacementSpec, seed: u64, virtual_point_max_error: f64) -> Self {
        let anchors = spec
            .target_indices
            .iter()
            .zip(&spec.anchors)
            .map(|(&target_index, anchor)| PlacementAnchorJson {
                target_index,
                neighbor_indices: anchor.neighbor_indices.clone(),
                displacements_m: anchor
                    .displacements
                    .iter()
                    .map(|d| [d.x, d.y, d.z])
                    .collect(),
            })
            .collect();
        PlacementSpecFile {
            length_units: LENGTH_UNITS.into(),
            pair_count: spec.pair_count(),
            delta_m: spec.delta,
            neighbor_count: spec.neighbor_count,
            seed,
            anchors,
            virtual_point_max_error_m: virtual_point_max_error,
        }
    }

    pub fn to_spec(&self, path: &Path) -> Result<PlacementSpec, FileFormatError> {
        if self.anchors.len() != self.pair_count {
            return Err(malformed(path, "pair_count does not match the anchor list"));
        }
        let mut target_indices = Vec::with_capacity(self.anchors.len());
        let mut anchors = Vec::with_capacity(self.anchors.len());
        for a in &self.anchors {
            if a.neighbor_indices.len() != self.neighbor_count
                || a.displacements_m.len() != self.neighbor_count
            {
                return Err(malformed(
                    path,
                    "anchor neighbor lists do not match neighbor_count",
                ));
            }
            target_indices.push(a.target_index);
            anchors.push(VirtualAnchor {
                neighbor_indices: a.neighbor_indices.clone(),
                displacements: a
                    .displacements_m
                    .iter()
                    .map(|d| Vector3::new(d[0], d[1], d[2]))
                    .collect(),
            });
        }
        Ok(PlacementSpec {
            target_indices,
            anchors,
            delta: self.delta_m,
            neighbor_count: self.neighbor_count,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateFile {
    pub length_units: String,
    pub angle_units: String,
    pub loss: f64,
    pub restart_losses: Vec<f64>,
    pub latent: Vec<f64>,
    pub scale: [f64; 3],
    pub pose: TransformJson,
}

impl EstimateFile {
    pub fn from_estimate(est: &ShapePoseEstimate) -> Self {
        EstimateFile {
            length_units: LENGTH_UNITS.into(),
            angle_units: ANGLE_UNITS.into(),
            loss: est.loss,
            restart_losses: est.restart_losses.clone(),
            latent: est.shape.latent.clone(),
            scale: [est.scale.x, est.scale.y, est.scale.z],
            pose: TransformJson {
                rotation: RotationJson::from_matrix(&est.rotation),
                translation_m: [est.translation.x, est.translation.y, est.translation.z],
            },
        }
    }

    pub fn shape_params(&self) -> ShapeParams {
        ShapeParams {
            latent: self.latent.clone(),
        }
    }
}

/// Output of the transfer command: the predicted grasp and placement for the
/// new scene, plus their composition (where the hand ends up if it grasps and
/// then executes the placement motion).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferFile {
    pub length_units: String,
    pub angle_units: String,
    pub grasp: TransformJson,
    pub placement: TransformJson,
    pub grasp_after_placement: TransformJson,
}
