//! Demo and benchmark scene construction: canonical grasp/placement poses
//! for the synthetic families and simulated partial point-cloud views.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use shapewarp::cloud::PointCloud;
use shapewarp::geometry::sample_surface_even;
use shapewarp::mesh::TriMesh;
use shapewarp::transform::RigidTransform;

use crate::synth::{GripperParams, MugParams, TreeParams};

fn rotation_from_rows(
    r0: Vector3<f64>,
    r1: Vector3<f64>,
    r2: Vector3<f64>,
) -> Matrix3<f64> {
    Matrix3::from_rows(&[r0.transpose(), r1.transpose(), r2.transpose()])
}

/// Pose that hangs a canonical mug on one branch of a canonical tree: the
/// branch axis threads the handle loop at `along` ∈ [0,1] of the branch's
/// free segment, with the body hanging below the branch.
pub fn hang_pose(mug: &MugParams, tree: &TreeParams, branch: usize, along: f64) -> RigidTransform {
    let seg = &tree.branch_segments()[branch];
    let hang_at = seg.start + (seg.end - seg.start) * along;
    let d = seg.direction.normalize();
    // Columns of the rotation are the images of the mug's axes: the handle
    // axis (+Z) goes onto the branch direction and the handle-side axis (+X)
    // onto "up projected perpendicular to the branch", so the body (toward
    // −X from the handle) ends up below.
    let up = Vector3::y();
    let e1 = (up - d * up.dot(&d)).normalize();
    let e2 = d.cross(&e1);
    let rotation = Matrix3::from_columns(&[e1, e2, d]);
    let translation = hang_at.coords - rotation * mug.handle_center().coords;
    RigidTransform::new(rotation, translation).expect("hang rotation is proper")
}

/// Gripper pose (gripper local → mug canonical) that straddles the mug body
/// wall opposite the handle: jaws span the body diameter across the mug's
/// z-axis, fingertips reaching past the widest line of the body.
pub fn body_grasp_pose(mug: &MugParams) -> RigidTransform {
    // Gripper axes → mug axes: gap direction (x̂) onto ẑ, width (ŷ) onto −ŷ,
    // approach (ẑ, fingertips forward) onto x̂ — approaching from −x, away
    // from the handle.
    let rotation = rotation_from_rows(
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(0.0, -1.0, 0.0),
        Vector3::new(1.0, 0.0, 0.0),
    )
    .transpose();
    // Fingertip plane just past the body's widest line (x = 0) so the jaws
    // straddle the full diameter; the palm then clears the far wall as long
    // as the fingers are longer than the body radius.
    let translation = Vector3::new(0.004, 0.45 * mug.body_height_m, 0.0);
    RigidTransform::new(rotation, translation).expect("grasp rotation is proper")
}

/// A gripper sized for the given mug: jaws clear the body by 0.5 mm a side.
pub fn gripper_for(mug: &MugParams) -> GripperParams {
    GripperParams::for_body_diameter(2.0 * mug.body_radius_m, 0.0005)
}

/// Uniform random rotation (Haar measure on SO(3)).
pub fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    let q = loop {
        let v: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
        if n > 1e-6 {
            break nalgebra::Quaternion::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n);
        }
    };
    *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix()
}

/// Random yaw about +Y.
pub fn random_yaw(rng: &mut impl Rng) -> Matrix3<f64> {
    let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    *nalgebra::Rotation3::from_axis_angle(&Vector3::y_axis(), a).matrix()
}

/// Simulates a single-viewpoint observation of a mesh: samples the surface
/// evenly, then keeps the `keep_fraction` of points facing a random view
/// direction. `keep_fraction ≥ 1` returns the full sampling.
pub fn view_cloud(
    mesh: &TriMesh,
    points: usize,
    keep_fraction: f64,
    seed: u64,
) -> Result<PointCloud, shapewarp::geometry::GeometryError> {
    let full = sample_surface_even(mesh, points, seed)?;
    if keep_fraction >= 1.0 {
        return Ok(full);
    }
    let mut rng = shapewarp::rng::rng_for_stream(seed, u64::MAX / 2);
    let dir = loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if v.norm() > 1e-6 {
            break v.normalize();
        }
    };
    let centroid = full.centroid();
    let keep = ((keep_fraction * full.len() as f64).ceil() as usize)
        .clamp(1, full.len());
    let mut order: Vec<usize> = (0..full.len()).collect();
    let depth: Vec<f64> = full
        .iter()
        .map(|p| (p.coords - centroid).dot(&dir))
        .collect();
    order.sort_by(|&a, &b| {
        depth[b]
            .partial_cmp(&depth[a])
            .expect("sampled depths are finite")
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = order[..keep].to_vec();
    chosen.sort_unstable();
    Ok(full.select(&chosen))
}

/// Signed clearance between two placed meshes: the most negative signed
/// distance from sampled surface points of one to the other, in both
/// directions. Positive means separated, negative means interpenetrating.
pub fn min_signed_clearance(
    a: &TriMesh,
    b: &TriMesh,
    samples_per_mesh: usize,
    seed: u64,
) -> Result<f64, shapewarp::geometry::GeometryError> {
    use shapewarp::geometry::MeshBvh;
    let bvh_a = MeshBvh::build(a);
    let bvh_b = MeshBvh::build(b);
    let pts_a = sample_surface_even(a, samples_per_mesh, seed)?;
    let pts_b = sample_surface_even(b, samples_per_mesh, seed.wrapping_add(1))?;
    let mut min = f64::INFINITY;
    for p in pts_a.iter() {
        min = min.min(bvh_b.signed_distance(p));
    }
    for p in pts_b.iter() {
        min = min.min(bvh_a.signed_distance(p));
    }
    Ok(min)
}
