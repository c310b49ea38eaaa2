//! Demonstrated grasps and placements, replayed on novel instances.
//!
//! Both interactions are recorded as *interaction points* tied to canonical
//! cloud indices. Because every decoded instance of a warp space shares the
//! canonical point ordering, those indices name "the same spot on the object"
//! on any new shape, and replaying a demonstration reduces to a closed-form
//! rigid alignment of two small corresponding point sets.
//!
//! * A grasp is a set of contact locations on the object, stored both as
//!   canonical indices and in the gripper's own frame. Aligning the
//!   gripper-frame copy onto the warped contact points of a new instance
//!   yields the new gripper pose.
//! * A placement between two objects is a set of *virtual points* on the
//!   contact interface: each is anchored to object A through its nearest
//!   neighbours and recorded against a specific point of object B. Aligning
//!   the re-anchored virtual points onto B's points yields the motion that
//!   places A.

use std::collections::HashSet;

use nalgebra::{Matrix3, Point3, Vector3};

use crate::cloud::PointCloud;
use crate::geometry::{
    farthest_point_sampling, horn_align, GeometryError, KdTree, MeshBvh,
};
use crate::inference::{infer_shape_pose, InferenceConfig, InferenceError};
use crate::mesh::TriMesh;
use crate::transform::RigidTransform;
use crate::warp::{ShapeParams, WarpError, WarpSpace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InteractionError {
    #[error("no contact pairs within the contact tolerance")]
    NoContacts,
    #[error("only {found} distinct contact points; at least 3 are needed")]
    InsufficientContacts { found: usize },
    #[error("only {available} point pairs lie within the nearby threshold")]
    NoNearbyPoints { available: usize },
    #[error("index {index} is out of range for a cloud of {cloud_len} points")]
    IndexOutOfRange { index: usize, cloud_len: usize },
    #[error("no demonstrations were provided")]
    NoDemonstrations,
    #[error("invalid request: {0}")]
    InvalidRequest(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// A demonstrated grasp, expressed through its contact points.
///
/// `contact_indices[j]` names the object cloud point at contact `j`, and
/// `gripper_points_local[j]` is that same demo contact location expressed in
/// the gripper's frame. Storing the object-side points in both frames makes
/// replaying the demonstration on its own cloud reproduce `demo_grasp`
/// exactly rather than only up to the contact tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspSpec {
    pub contact_indices: Vec<usize>,
    pub gripper_points_local: Vec<Point3<f64>>,
    pub demo_grasp: RigidTransform,
}

impl GraspSpec {
    pub fn pair_count(&self) -> usize {
        self.contact_indices.len()
    }
}

/// One virtual point's attachment to object A: its `neighbor_count` nearest
/// cloud points and the offsets from them, so the point can be re-created on
/// any warped instance as the mean of `A[n_k] + Δ_k`, with the offsets
/// carried into the new neighbourhood's orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualAnchor {
    pub neighbor_indices: Vec<usize>,
    pub displacements: Vec<Vector3<f64>>,
}

/// A demonstrated placement of object A against object B.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementSpec {
    /// For each virtual point, the index of its partner point in cloud B.
    pub target_indices: Vec<usize>,
    /// For each virtual point, its anchoring into cloud A.
    pub anchors: Vec<VirtualAnchor>,
    /// The nearby-pair threshold the spec was extracted with (metres).
    pub delta: f64,
    /// Anchor neighbours per virtual point.
    pub neighbor_count: usize,
}

impl PlacementSpec {
    pub fn pair_count(&self) -> usize {
        self.target_indices.len()
    }

    /// Re-creates the virtual points on an instance of object A.
    ///
    /// The stored offsets describe the demo neighbourhood, whose geometry
    /// they determine up to translation (demo anchor k sits at `−Δ_k` plus a
    /// constant). Aligning that recovered shape onto the instance's anchor
    /// points gives the local rotation the neighbourhood has undergone, and
    /// the offsets are carried through it. On the demo cloud itself the
    /// alignment is the identity and the reconstruction is exact; under a
    /// rigid motion of the object the virtual points follow it exactly; under
    /// a warp they follow the local surface orientation.
    pub fn virtual_points(&self, cloud_a: &PointCloud) -> Result<Vec<Point3<f64>>, InteractionError> {
        self.anchors
            .iter()
            .map(|anchor| {
                let count = anchor.neighbor_indices.len() as f64;
                let mut points = Vec::with_capacity(anchor.neighbor_indices.len());
                for &n in &anchor.neighbor_indices {
                    points.push(checked(cloud_a, n)?);
                }
                let mean: Vector3<f64> =
                    points.iter().map(|p| p.coords).sum::<Vector3<f64>>() / count;
                let offset: Vector3<f64> =
                    anchor.displacements.iter().sum::<Vector3<f64>>() / count;

                let rotation = if points.len() >= 3 {
                    let demo = PointCloud::new(
                        anchor.displacements.iter().map(|d| Point3::from(offset - d)).collect(),
                    );
                    let instance = PointCloud::new(
                        points.iter().map(|p| Point3::from(p.coords - mean)).collect(),
                    );
                    match horn_align(&demo, &instance) {
                        Ok(t) => *t.rotation(),
                        Err(_) => Matrix3::identity(),
                    }
                } else {
                    Matrix3::identity()
                };
                Ok(Point3::from(mean + rotation * offset))
            })
            .collect()
    }
}

/// One recorded manipulation: both objects' complete clouds (canonical
/// ordering) in the demonstrated placed configuration, the latent shapes they
/// were inferred to have, and optionally the gripper and its grasp pose.
#[derive(Debug, Clone)]
pub struct Demonstration {
    pub placed_cloud_a: PointCloud,
    pub placed_cloud_b: PointCloud,
    pub shape_a: ShapeParams,
    pub shape_b: ShapeParams,
    pub gripper_mesh: Option<TriMesh>,
    pub demo_grasp: Option<RigidTransform>,
}

fn checked(cloud: &PointCloud, index: usize) -> Result<Point3<f64>, InteractionError> {
    if index >= cloud.len() {
        return Err(InteractionError::IndexOutOfRange { index, cloud_len: cloud.len() });
    }
    Ok(cloud[index])
}

/// Records a grasp demonstration as contact interaction points.
///
/// Contact candidates are the closest-point pairs of every object/gripper
/// triangle pair within `contact_eps` of each other (the gripper mesh posed
/// at `grasp`). After removing bit-exact duplicates of the object-side
/// points, farthest point sampling keeps at most `pairs` of them, spread over
/// the whole contact region; each survivor is snapped to its nearest object
/// cloud point.
pub fn extract_grasp_contacts(
    object_mesh: &TriMesh,
    object_cloud: &PointCloud,
    gripper_mesh: &TriMesh,
    grasp: &RigidTransform,
    contact_eps: f64,
    pairs: usize,
    seed: u64,
) -> Result<GraspSpec, InteractionError> {
    if pairs < 3 {
        return Err(InteractionError::InvalidRequest("a grasp needs at least 3 contact pairs"));
    }
    if object_cloud.is_empty() {
        return Err(InteractionError::Geometry(GeometryError::EmptyCloud));
    }

    let posed = TriMesh::new(
        gripper_mesh.vertices().iter().map(|v| grasp.apply(v)).collect(),
        gripper_mesh.faces().to_vec(),
    )
    .expect("rigid motion preserves mesh validity");
    let object_bvh = MeshBvh::build(object_mesh);
    let gripper_bvh = MeshBvh::build(&posed);
    let contacts = MeshBvh::pairs_within(&object_bvh, &gripper_bvh, contact_eps);
    if contacts.is_empty() {
        return Err(InteractionError::NoContacts);
    }

    // Adjacent triangle pairs often meet at the same closest point; keep the
    // first of each bit-identical object-side location.
    let mut seen = HashSet::new();
    let mut object_points = Vec::new();
    for c in &contacts {
        let key = [c.point_a.x.to_bits(), c.point_a.y.to_bits(), c.point_a.z.to_bits()];
        if seen.insert(key) {
            object_points.push(c.point_a);
        }
    }
    if object_points.len() < 3 {
        return Err(InteractionError::InsufficientContacts { found: object_points.len() });
    }

    let candidates = PointCloud::new(object_points);
    let keep = pairs.min(candidates.len());
    let selected = farthest_point_sampling(&candidates, keep, seed)?;

    let tree = KdTree::build(object_cloud.points());
    let inverse_grasp = grasp.inverse();
    let mut contact_indices = Vec::with_capacity(keep);
    let mut gripper_points_local = Vec::with_capacity(keep);
    for &s in &selected {
        let (i, _) = tree.nearest(&candidates[s]);
        contact_indices.push(i);
        gripper_points_local.push(inverse_grasp.apply(&object_cloud[i]));
    }

    Ok(GraspSpec { contact_indices, gripper_points_local, demo_grasp: grasp.clone() })
}

/// New gripper pose for a new instance: the rigid transform aligning the
/// gripper-frame contact points onto the instance's warped contact points.
pub fn transfer_grasp(
    spec: &GraspSpec,
    new_cloud: &PointCloud,
) -> Result<RigidTransform, InteractionError> {
    let targets: Vec<Point3<f64>> = spec
        .contact_indices
        .iter()
        .map(|&i| checked(new_cloud, i))
        .collect::<Result<_, _>>()?;
    let local = PointCloud::new(spec.gripper_points_local.clone());
    Ok(horn_align(&local, &PointCloud::new(targets))?)
}

/// Records a placement demonstration between clouds captured in the placed
/// configuration.
///
/// Every cross-cloud pair strictly closer than `delta` is a candidate;
/// farthest point sampling over the pair midpoints keeps `pairs` of them.
/// Each kept pair becomes a virtual point at its B-side location, anchored to
/// cloud A by its `neighbors` nearest A-points; the stored displacements make
/// the anchored mean reproduce the B-side point exactly on the demo clouds.
pub fn extract_placement_points(
    cloud_a: &PointCloud,
    cloud_b: &PointCloud,
    delta: f64,
    pairs: usize,
    neighbors: usize,
    seed: u64,
) -> Result<PlacementSpec, InteractionError> {
    if pairs < 3 {
        return Err(InteractionError::InvalidRequest("a placement needs at least 3 virtual points"));
    }
    if neighbors == 0 {
        return Err(InteractionError::InvalidRequest("each virtual point needs at least 1 anchor neighbour"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(InteractionError::InvalidRequest("the nearby threshold must be positive and finite"));
    }
    if cloud_a.is_empty() || cloud_b.is_empty() {
        return Err(InteractionError::Geometry(GeometryError::EmptyCloud));
    }
    if neighbors > cloud_a.len() {
        return Err(InteractionError::Geometry(GeometryError::InsufficientPoints {
            requested: neighbors,
            available: cloud_a.len(),
        }));
    }

    let tree_b = KdTree::build(cloud_b.points());
    let delta2 = delta * delta;
    let mut pair_ids = Vec::new();
    let mut midpoints = Vec::new();
    for (ai, a) in cloud_a.iter().enumerate() {
        for bi in tree_b.within_radius(a, delta2) {
            let b = cloud_b[bi];
            // The radius query is inclusive; the nearby criterion is strict.
            if (a - b).norm_squared() < delta2 {
                pair_ids.push((ai, bi));
                midpoints.push(Point3::from((a.coords + b.coords) / 2.0));
            }
        }
    }
    if pair_ids.len() < pairs {
        return Err(InteractionError::NoNearbyPoints { available: pair_ids.len() });
    }

    let selected = farthest_point_sampling(&PointCloud::new(midpoints), pairs, seed)?;

    let tree_a = KdTree::build(cloud_a.points());
    let mut target_indices = Vec::with_capacity(pairs);
    let mut anchors = Vec::with_capacity(pairs);
    for &s in &selected {
        let (_, bi) = pair_ids[s];
        let p_b = cloud_b[bi];
        let neighbor_indices: Vec<usize> =
            tree_a.k_nearest(&p_b, neighbors).into_iter().map(|(i, _)| i).collect();
        let displacements = neighbor_indices.iter().map(|&n| p_b - cloud_a[n]).collect();
        target_indices.push(bi);
        anchors.push(VirtualAnchor { neighbor_indices, displacements });
    }

    Ok(PlacementSpec { target_indices, anchors, delta, neighbor_count: neighbors })
}

/// Motion of object A that realizes the demonstrated placement against a new
/// scene: aligns A's re-anchored virtual points onto B's target points.
pub fn transfer_placement(
    spec: &PlacementSpec,
    new_cloud_a: &PointCloud,
    new_cloud_b: &PointCloud,
) -> Result<RigidTransform, InteractionError> {
    let virtual_points = spec.virtual_points(new_cloud_a)?;
    let targets: Vec<Point3<f64>> = spec
        .target_indices
        .iter()
        .map(|&i| checked(new_cloud_b, i))
        .collect::<Result<_, _>>()?;
    Ok(horn_align(&PointCloud::new(virtual_points), &PointCloud::new(targets))?)
}

/// The gripper pose that executes a placement: the placing motion composed
/// with the grasp the hand already holds.
pub fn placement_in_hand_frame(
    placement: &RigidTransform,
    executed_grasp: &RigidTransform,
) -> RigidTransform {
    placement.compose(executed_grasp)
}

/// Knobs for [`select_demonstration`]'s internal re-prediction.
#[derive(Debug, Clone)]
pub struct SelectionConfig {
    /// Nearby-pair threshold for placement extraction (metres).
    pub delta: f64,
    /// Virtual points per placement.
    pub pairs: usize,
    /// Anchor neighbours per virtual point.
    pub neighbors: usize,
    pub seed: u64,
    pub inference: InferenceConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            delta: 0.02,
            pairs: 32,
            neighbors: 10,
            seed: 0,
            inference: InferenceConfig::default(),
        }
    }
}

/// Errors that mean "this demonstration can't be replayed", as opposed to a
/// misconfiguration that would fail for every demonstration.
fn is_per_demo_failure(err: &InteractionError) -> bool {
    match err {
        InteractionError::NoContacts
        | InteractionError::InsufficientContacts { .. }
        | InteractionError::NoNearbyPoints { .. }
        | InteractionError::Geometry(_) => true,
        InteractionError::Inference(e) => !matches!(e, InferenceError::InvalidConfig(_)),
        _ => false,
    }
}

fn score_demonstration(
    demo: &Demonstration,
    space_a: &WarpSpace,
    space_b: &WarpSpace,
    config: &SelectionConfig,
) -> Result<f64, InteractionError> {
    if demo.placed_cloud_a.len() != space_a.point_count() {
        return Err(InteractionError::InvalidRequest(
            "demonstration cloud A is not in canonical ordering for its warp space",
        ));
    }
    if demo.placed_cloud_b.len() != space_b.point_count() {
        return Err(InteractionError::InvalidRequest(
            "demonstration cloud B is not in canonical ordering for its warp space",
        ));
    }

    // What the warp spaces believe the demo scene looked like.
    let est_a = infer_shape_pose(space_a, &demo.placed_cloud_a, &config.inference)?;
    let est_b = infer_shape_pose(space_b, &demo.placed_cloud_b, &config.inference)?;
    let decoded_a = est_a.decode_posed(space_a)?;
    let decoded_b = est_b.decode_posed(space_b)?;

    // Replay the recorded placement on those beliefs.
    let spec = extract_placement_points(
        &demo.placed_cloud_a,
        &demo.placed_cloud_b,
        config.delta,
        config.pairs,
        config.neighbors,
        config.seed,
    )?;
    let motion = transfer_placement(&spec, &decoded_a, &decoded_b)?;

    // How far the replayed placement lands from the demonstrated one.
    let mut total = 0.0;
    for (p, q) in decoded_a.iter().zip(demo.placed_cloud_a.iter()) {
        total += (motion.apply(p) - q).norm();
    }
    Ok(total / decoded_a.len() as f64)
}

/// Picks the demonstration the warp spaces reproduce most faithfully: each
/// demo's placement is re-predicted from the spaces' own reading of its scene
/// and scored by mean point distance to the demonstrated result. Demos whose
/// replay fails outright score `+∞`; ties go to the lowest index.
pub fn select_demonstration(
    demos: &[Demonstration],
    space_a: &WarpSpace,
    space_b: &WarpSpace,
    config: &SelectionConfig,
) -> Result<usize, InteractionError> {
    if demos.is_empty() {
        return Err(InteractionError::NoDemonstrations);
    }
    let mut best = (f64::INFINITY, 0usize);
    for (i, demo) in demos.iter().enumerate() {
        let score = match score_demonstration(demo, space_a, space_b, config) {
            Ok(s) => s,
            Err(e) if is_per_demo_failure(&e) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if score < best.0 {
            best = (score, i);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_surface_even;
    use crate::testgeom::{grid_box, skew_family};
    use crate::warp::{learn_warp_space, WarpConfig};
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix3;

    fn unit_box() -> TriMesh {
        grid_box(3, |p| p)
    }

    /// A thin square plate at x = 0 spanning y, z ∈ [−h, h], subdivided so
    /// parallel-face contact yields closest points all over the overlap
    /// region instead of just at a few triangle corners.
    fn plate(h: f64) -> TriMesh {
        let n = 8;
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                vertices.push(Point3::new(
                    0.0,
                    -h + 2.0 * h * i as f64 / n as f64,
                    -h + 2.0 * h * j as f64 / n as f64,
                ));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let a = i * (n + 1) + j;
                let (b, c) = (a + 1, a + n + 1);
                faces.push([a, b, c + 1]);
                faces.push([a, c + 1, c]);
            }
        }
        TriMesh::new(vertices, faces).unwrap()
    }

    fn translation(x: f64, y: f64, z: f64) -> RigidTransform {
        RigidTransform::new(Matrix3::identity(), Vector3::new(x, y, z)).unwrap()
    }

    fn z_rotation(angle: f64, t: Vector3<f64>) -> RigidTransform {
        let (s, c) = angle.sin_cos();
        let r = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        RigidTransform::new(r, t).unwrap()
    }

    #[test]
    fn contacts_found_on_the_touching_face() {
        let object = unit_box();
        let cloud = sample_surface_even(&object, 1500, 4).unwrap();
        // Plate hovering 0.5 mm off the +x face of the box.
        let grasp = translation(1.0005, 0.0, 0.0);
        let spec = extract_grasp_contacts(&object, &cloud, &plate(0.5), &grasp, 1e-3, 16, 0)
            .unwrap();

        assert_eq!(spec.pair_count(), 16);
        assert_eq!(spec.contact_indices.len(), spec.gripper_points_local.len());
        assert_eq!(spec.demo_grasp, grasp);
        for &i in &spec.contact_indices {
            let p = cloud[i];
            // Snapped points live on (or next to) the contact face, inside
            // the plate's footprint plus the cloud's sampling spacing.
            assert!(p.x > 0.85, "contact {p:?} is not on the +x face");
            assert!(p.y.abs() < 0.65 && p.z.abs() < 0.65, "contact {p:?} outside the plate footprint");
        }
    }

    #[test]
    fn no_contacts_when_the_gripper_hovers_away() {
        let object = unit_box();
        let cloud = sample_surface_even(&object, 300, 4).unwrap();
        let grasp = translation(1.01, 0.0, 0.0); // 10 mm ≫ ε = 1 mm
        assert_eq!(
            extract_grasp_contacts(&object, &cloud, &plate(0.5), &grasp, 1e-3, 8, 0).unwrap_err(),
            InteractionError::NoContacts
        );
    }

    #[test]
    fn grasp_identity_and_equivariance() {
        let object = unit_box();
        let cloud = sample_surface_even(&object, 1000, 9).unwrap();
        let grasp = z_rotation(0.3, Vector3::new(1.0004, 0.1, -0.05));
        let spec =
            extract_grasp_contacts(&object, &cloud, &plate(0.6), &grasp, 2e-3, 12, 1).unwrap();

        // Replaying on the demo cloud reproduces the demo grasp.
        let again = transfer_grasp(&spec, &cloud).unwrap();
        assert!(again.rotation_angle_to(&grasp) < 1e-9);
        assert!((again.translation() - grasp.translation()).norm() < 1e-9);

        // Rigidly moving the object moves the grasp with it.
        let motion = z_rotation(1.1, Vector3::new(0.4, -2.0, 0.7));
        let moved = transfer_grasp(&spec, &cloud.transformed(&motion)).unwrap();
        let expected = motion.compose(&grasp);
        assert!(moved.rotation_angle_to(&expected) < 1e-9);
        assert!((moved.translation() - expected.translation()).norm() < 1e-9);
    }

    /// Two box clouds with facing sides 1 cm apart: a placement interface.
    fn placement_scene() -> (PointCloud, PointCloud) {
        let a = sample_surface_even(&unit_box(), 900, 5).unwrap();
        let b = sample_surface_even(&unit_box(), 900, 6).unwrap().translated(&Vector3::new(2.01, 0.0, 0.0));
        (a, b)
    }

    #[test]
    fn placement_virtual_points_reconstruct_exactly() {
        let (a, b) = placement_scene();
        let delta = 0.08;
        let spec = extract_placement_points(&a, &b, delta, 10, 5, 0).unwrap();
        assert_eq!(spec.pair_count(), 10);

        let virtual_points = spec.virtual_points(&a).unwrap();
        for (j, q) in virtual_points.iter().enumerate() {
            let p_b = b[spec.target_indices[j]];
            // The anchored mean reproduces the recorded B-side point.
            assert!((q - p_b).norm() < 1e-12);
            // And that point really is within the nearby threshold of A,
            // verified against every A point.
            let nearest = a.iter().map(|p| (p - p_b).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < delta);
        }
    }

    #[test]
    fn placement_identity_and_equivariance() {
        let (a, b) = placement_scene();
        let spec = extract_placement_points(&a, &b, 0.08, 12, 6, 3).unwrap();

        let identity = transfer_placement(&spec, &a, &b).unwrap();
        assert!(identity.rotation_angle_to(&RigidTransform::identity()) < 1e-9);
        assert!(identity.translation().norm() < 1e-9);

        // Moving object B moves the placement with it.
        let motion = z_rotation(0.8, Vector3::new(-1.0, 0.5, 2.0));
        let follow = transfer_placement(&spec, &a, &b.transformed(&motion)).unwrap();
        assert!(follow.rotation_angle_to(&motion) < 1e-6);
        assert!((follow.translation() - motion.translation()).norm() < 1e-6);

        // Moving object A alone is undone exactly: the anchored virtual
        // points rotate with A's cloud, so the recovered placement is the
        // inverse motion.
        let moved_a = transfer_placement(&spec, &a.transformed(&motion), &b).unwrap();
        let inverse = motion.inverse();
        assert!(moved_a.rotation_angle_to(&inverse) < 1e-9);
        assert!((moved_a.translation() - inverse.translation()).norm() < 1e-9);

        // Moving the whole demo scene leaves nothing to correct.
        let moved_scene =
            transfer_placement(&spec, &a.transformed(&motion), &b.transformed(&motion)).unwrap();
        assert!(moved_scene.rotation_angle_to(&RigidTransform::identity()) < 1e-9);
        assert!(moved_scene.translation().norm() < 1e-9);
    }

    #[test]
    fn placement_transfer_beats_random_perturbations() {
        let (a, b) = placement_scene();
        let spec = extract_placement_points(&a, &b, 0.08, 12, 6, 3).unwrap();
        // A mildly different instance of A: same cloud, gently sheared.
        let new_a = PointCloud::new(
            a.iter().map(|p| Point3::new(p.x + 0.05 * p.y, p.y * 1.03, p.z)).collect(),
        );
        let motion = transfer_placement(&spec, &new_a, &b).unwrap();

        let residual = |t: &RigidTransform| -> f64 {
            let q = spec.virtual_points(&new_a).unwrap();
            q.iter()
                .zip(&spec.target_indices)
                .map(|(p, &bi)| (t.apply(p) - b[bi]).norm_squared())
                .sum()
        };
        let best = residual(&motion);
        let mut rng = crate::rng::rng_for_seed(11);
        for _ in 0..200 {
            let jitter = z_rotation(
                0.05 * (rand::Rng::gen::<f64>(&mut rng) - 0.5),
                Vector3::new(
                    0.02 * (rand::Rng::gen::<f64>(&mut rng) - 0.5),
                    0.02 * (rand::Rng::gen::<f64>(&mut rng) - 0.5),
                    0.02 * (rand::Rng::gen::<f64>(&mut rng) - 0.5),
                ),
            );
            assert!(residual(&jitter.compose(&motion)) >= best - 1e-12);
        }
    }

    #[test]
    fn placement_errors() {
        let (a, b) = placement_scene();
        // Far apart: nothing within the threshold.
        let far = b.translated(&Vector3::new(5.0, 0.0, 0.0));
        assert_eq!(
            extract_placement_points(&a, &far, 0.05, 8, 5, 0).unwrap_err(),
            InteractionError::NoNearbyPoints { available: 0 }
        );
        // Too few pairs for the requested count reports what was achievable.
        match extract_placement_points(&a, &b, 0.022, 400, 5, 0).unwrap_err() {
            InteractionError::NoNearbyPoints { available } => assert!(available < 400),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            extract_placement_points(&a, &b, 0.08, 2, 5, 0).unwrap_err(),
            InteractionError::InvalidRequest(_)
        ));
    }

    #[test]
    fn hand_frame_composition_moves_the_contact_points() {
        let grasp = z_rotation(0.4, Vector3::new(0.2, -0.1, 0.9));
        let placement = z_rotation(-1.2, Vector3::new(1.0, 2.0, -0.5));
        let hand = placement_in_hand_frame(&placement, &grasp);
        let local = Point3::new(0.03, -0.01, 0.12);
        // A gripper-frame point carried through the executed grasp and then
        // the placing motion must equal the same point under the hand pose.
        assert_abs_diff_eq!(
            hand.apply(&local),
            placement.apply(&grasp.apply(&local)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn selects_the_demonstration_the_spaces_can_reproduce() {
        let meshes = skew_family(4);
        let config = WarpConfig {
            canonical_samples: 130,
            training_samples: 90,
            selection_samples: 60,
            ..WarpConfig::default()
        };
        let space_a = learn_warp_space(&meshes[..3], &config).unwrap();
        let space_b = learn_warp_space(&meshes[1..], &config).unwrap();

        let in_family_a = space_a
            .decode(&ShapeParams { latent: space_a.training_latents[1].clone() })
            .unwrap();
        let in_family_b = space_b
            .decode(&ShapeParams { latent: space_b.training_latents[1].clone() })
            .unwrap()
            .translated(&Vector3::new(2.05, 0.0, 0.0));

        // The distorted demo shows shapes no latent vector can produce.
        let warp_out = |p: &Point3<f64>| Point3::new(p.x * 1.4, p.y + 0.3 * p.x * p.x, p.z * 0.7);
        let out_family_a = PointCloud::new(in_family_a.iter().map(warp_out).collect());
        let out_family_b = PointCloud::new(in_family_b.iter().map(warp_out).collect());

        let demo = |a: &PointCloud, b: &PointCloud| Demonstration {
            placed_cloud_a: a.clone(),
            placed_cloud_b: b.clone(),
            shape_a: ShapeParams::zeros(space_a.latent_dim()),
            shape_b: ShapeParams::zeros(space_b.latent_dim()),
            gripper_mesh: None,
            demo_grasp: None,
        };
        let demos = vec![demo(&out_family_a, &out_family_b), demo(&in_family_a, &in_family_b)];

        // The decoded clouds are coarse (~0.3 point spacing), so the nearby
        // threshold must admit laterally offset pairs across the interface.
        let selection = SelectionConfig {
            delta: 0.3,
            pairs: 8,
            neighbors: 5,
            inference: InferenceConfig { restarts: 6, steps: 100, ..InferenceConfig::default() },
            ..SelectionConfig::default()
        };
        assert_eq!(select_demonstration(&demos, &space_a, &space_b, &selection).unwrap(), 1);

        // Ties (identical demos) resolve to the lowest index.
        let twins = vec![demo(&in_family_a, &in_family_b), demo(&in_family_a, &in_family_b)];
        assert_eq!(select_demonstration(&twins, &space_a, &space_b, &selection).unwrap(), 0);

        assert_eq!(
            select_demonstration(&[], &space_a, &space_b, &selection).unwrap_err(),
            InteractionError::NoDemonstrations
        );
    }
}
