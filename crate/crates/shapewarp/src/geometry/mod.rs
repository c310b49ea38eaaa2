//! Point-cloud and mesh geometry primitives.

mod bvh;
mod chamfer;
mod dbscan;
mod fps;
mod horn;
mod kdtree;
mod knn;
mod primitives;
mod rotation;
mod surface;

pub use bvh::{ContactPair, MeshBvh};
pub use chamfer::one_sided_chamfer;
pub use dbscan::dbscan;
pub use fps::farthest_point_sampling;
pub use horn::horn_align;
pub use kdtree::KdTree;
pub use knn::k_nearest_neighbors;
pub use primitives::{
    closest_point_on_triangle, closest_points_on_segments, closest_points_on_triangles,
    ray_triangle_intersection,
};
pub use rotation::{gram_schmidt, uniform_random_rotation};
pub(crate) use rotation::gram_schmidt_backward;
pub use surface::sample_surface_even;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("operation requires a non-empty point cloud")]
    EmptyCloud,
    #[error("requested {requested} points but only {available} are available")]
    InsufficientPoints { requested: usize, available: usize },
    #[error("input vectors do not span a plane")]
    DegenerateBasis,
    #[error("point counts differ: {from_len} source vs {to_len} target")]
    PairCountMismatch { from_len: usize, to_len: usize },
    #[error("point configuration is degenerate (fewer than 3 points, or collinear)")]
    DegenerateConfiguration,
    #[error("mesh has no face with positive area")]
    DegenerateMesh,
}

/// Squared Euclidean distance, evaluated the same way everywhere so that
/// accelerated searches reproduce brute-force results bit for bit.
#[inline(always)]
pub(crate) fn dist2(a: &nalgebra::Point3<f64>, b: &nalgebra::Point3<f64>) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}
