//! Category-level shape warping.
//!
//! The crate learns a low-dimensional space of deformations for a category of
//! objects (mugs, bowls, ...) by non-rigidly registering a canonical object
//! onto every other training instance and running PCA over the resulting
//! displacement fields. New, possibly partial point clouds are then explained
//! by jointly optimizing latent shape, anisotropic scale and an SE(3) pose.
//! Because every inferred cloud is a deformation of the same canonical object,
//! point indices correspond across instances, which is what makes grasp and
//! placement transfer ([`interaction`]) a matter of reading off a handful of
//! indexed points and solving a small rigid-alignment problem.
//!
//! Module map:
//!
//! * [`geometry`] — point-cloud and mesh primitives: Chamfer distances,
//!   k-NN, farthest-point sampling, rigid alignment, even surface sampling,
//!   DBSCAN, mesh proximity queries.
//! * [`cpd`] — coherent point drift: non-rigid registration producing a
//!   smooth displacement field.
//! * [`warp`] — canonical-object selection, warp-space learning (PCA over
//!   displacement fields), decoding and mesh reconstruction.
//! * [`inference`] — gradient-based joint shape and pose estimation from an
//!   observed cloud, with random-restart optimization.
//! * [`interaction`] — contact-point extraction from a demonstration and
//!   grasp/placement transfer onto newly inferred objects.

pub mod cloud;
pub mod cpd;
pub mod geometry;
pub mod inference;
pub mod interaction;
mod linalg;
pub mod mesh;
pub mod rng;
#[cfg(test)]
mod testgeom;
pub mod transform;
pub mod warp;

pub use cloud::PointCloud;
pub use mesh::TriMesh;
pub use transform::RigidTransform;
