//! End-to-end exercise of the public API: learn a deformation space from a
//! small mesh family, fit a posed instance from its point cloud, and carry a
//! placement across instances.

use nalgebra::{Matrix3, Point3, Vector3};

use shapewarp::cloud::PointCloud;
use shapewarp::cpd::CpdConfig;
use shapewarp::geometry::{one_sided_chamfer, sample_surface_even, uniform_random_rotation};
use shapewarp::inference::{infer_shape_pose, InferenceConfig};
use shapewarp::interaction::{extract_placement_points, transfer_placement};
use shapewarp::mesh::TriMesh;
use shapewarp::rng::rng_for_seed;
use shapewarp::transform::RigidTransform;
use shapewarp::warp::{learn_warp_space, SelectionMethod, ShapeParams, WarpConfig};

/// A closed box surface with every vertex run through `deform`; enough
/// structure for registration without any rotational symmetry.
fn deformed_box(n: usize, deform: impl Fn(Point3<f64>) -> Point3<f64>) -> TriMesh {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let axes: [(Vector3<f64>, Vector3<f64>, Vector3<f64>); 6] = [
        (Vector3::x(), Vector3::y(), Vector3::z()),
        (-Vector3::x(), Vector3::z(), Vector3::y()),
        (Vector3::y(), Vector3::z(), Vector3::x()),
        (-Vector3::y(), Vector3::x(), Vector3::z()),
        (Vector3::z(), Vector3::x(), Vector3::y()),
        (-Vector3::z(), Vector3::y(), Vector3::x()),
    ];
    for (normal, ua, va) in axes {
        let base = vertices.len();
        for i in 0..=n {
            for j in 0..=n {
                let u = 2.0 * i as f64 / n as f64 - 1.0;
                let v = 2.0 * j as f64 / n as f64 - 1.0;
                vertices.push(deform(Point3::from(normal + ua * u + va * v)));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let a = base + i * (n + 1) + j;
                let (b, c) = (a + 1, a + n + 1);
                faces.push([a, b, c + 1]);
                faces.push([a, c + 1, c]);
            }
        }
    }
    TriMesh::new(vertices, faces).unwrap()
}

fn family(k: usize) -> Vec<TriMesh> {
    (0..k)
        .map(|i| {
            let s = 1.0 + 0.15 * i as f64;
            deformed_box(3, move |p| {
                Point3::new(
                    0.1 * (p.x + 0.3 * p.y * p.y),
                    0.1 * s * p.y,
                    0.1 * (0.6 * p.z + 0.1 * (3.0 * p.x).sin()),
                )
            })
        })
        .collect()
}

#[test]
fn learned_space_supports_inference_and_placement_transfer() {
    let meshes = family(4);
    let config = WarpConfig {
        latent_dim: None,
        canonical_samples: 250,
        training_samples: 220,
        selection_samples: 80,
        selection: SelectionMethod::Fixed(0),
        cpd: CpdConfig::default(),
        seed: 9,
    };
    let space = learn_warp_space(&meshes, &config).unwrap();
    assert_eq!(space.latent_dim(), 3);

    // Every training member decodes onto its own surface. At these point
    // counts coverage is floored by sampling resolution, so compare against
    // an equal-size resampling of the true surface.
    for (k, mesh) in meshes.iter().enumerate() {
        let decoded = space
            .decode(&ShapeParams { latent: space.training_latents[k].clone() })
            .unwrap();
        let reference = sample_surface_even(mesh, 500, 17).unwrap();
        let fit = one_sided_chamfer(&decoded, &reference, false).unwrap();
        let resampled = sample_surface_even(mesh, space.point_count(), 31).unwrap();
        let floor = one_sided_chamfer(&resampled, &reference, false).unwrap();
        assert!(fit < 1.5 * floor, "member {k}: fit {fit:.4} vs sampling floor {floor:.4}");
    }

    // A posed, scaled instance is recovered from its full cloud.
    let mut rng = rng_for_seed(23);
    let rotation: Matrix3<f64> = uniform_random_rotation(&mut rng);
    let translation = Vector3::new(0.05, -0.03, 0.08);
    let scale = Vector3::new(1.05, 0.95, 1.02);
    let truth = space
        .decode(&ShapeParams { latent: space.training_latents[2].clone() })
        .unwrap();
    let observed = PointCloud::new(
        truth
            .iter()
            .map(|p| Point3::from(rotation * p.coords.component_mul(&scale) + translation))
            .collect(),
    );
    let est = infer_shape_pose(
        &space,
        &observed,
        &InferenceConfig { restarts: 10, steps: 120, subsample: 400, ..InferenceConfig::default() },
    )
    .unwrap();
    let fitted = est.decode_posed(&space).unwrap();
    let residual = one_sided_chamfer(&fitted, &observed, false).unwrap();
    assert!(residual < 0.005, "inference left a residual of {residual:.4} m");

    // A placement recorded between two decoded clouds transfers to a rigidly
    // moved copy of the scene with the same relative arrangement.
    let cloud_a = truth;
    let offset = Vector3::new(0.0, 0.25, 0.0);
    let cloud_b = PointCloud::new(
        space
            .decode(&ShapeParams { latent: space.training_latents[0].clone() })
            .unwrap()
            .iter()
            .map(|p| p + offset)
            .collect(),
    );
    let spec = extract_placement_points(&cloud_a, &cloud_b, 0.3, 12, 6, 31).unwrap();

    let identity = transfer_placement(&spec, &cloud_a, &cloud_b).unwrap();
    assert!(identity.rotation_angle_to(&RigidTransform::identity()) < 1e-9);
    assert!(identity.translation_distance_to(&RigidTransform::identity()) < 1e-9);

    let g = RigidTransform::new(uniform_random_rotation(&mut rng), Vector3::new(0.1, 0.0, -0.2))
        .unwrap();
    let moved_a = PointCloud::new(cloud_a.iter().map(|p| g.apply(p)).collect());
    let moved_b = PointCloud::new(cloud_b.iter().map(|p| g.apply(p)).collect());
    let moved = transfer_placement(&spec, &moved_a, &moved_b).unwrap();
    let expected = g.compose(&identity).compose(&g.inverse());
    let angle = moved.rotation_angle_to(&expected);
    let dist = moved.translation_distance_to(&expected);
    assert!(angle < 1e-9, "equivariance rotation defect {angle:.3e}");
    assert!(dist < 1e-9, "equivariance translation defect {dist:.3e}");
}
