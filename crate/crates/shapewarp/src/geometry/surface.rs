//! Even surface sampling of triangle meshes.

use std::collections::HashMap;

use nalgebra::Point3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{GeometryError, dist2};
use crate::cloud::PointCloud;
use crate::mesh::TriMesh;
use crate::rng::rng_for_seed;

/// How many area-weighted candidates the rejection phase may consume per
/// requested sample before giving up and topping up unconditionally.
const ATTEMPTS_PER_SAMPLE: usize = 10;

/// Draws exactly `n` points approximately evenly over the mesh surface.
///
/// Candidates are drawn area-weighted (uniform over the surface) and rejected
/// while they fall within `r = sqrt(total_area / n) / 2` of an already
/// accepted sample; if the attempt budget runs out before `n` points are
/// accepted, the remainder is filled with plain area-weighted draws so the
/// output always has exactly `n` points. Deterministic for a given seed.
pub fn sample_surface_even(mesh: &TriMesh, n: usize, seed: u64) -> Result<PointCloud, GeometryError> {
    let areas: Vec<f64> = (0..mesh.face_count()).map(|f| mesh.face_area(f)).collect();
    let total: f64 = areas.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(GeometryError::DegenerateMesh);
    }
    if n == 0 {
        return Ok(PointCloud::new(Vec::new()));
    }

    // Cumulative areas for O(log F) face selection.
    let mut cumulative = Vec::with_capacity(areas.len());
    let mut acc = 0.0;
    for a in &areas {
        acc += a;
        cumulative.push(acc);
    }

    let mut rng = rng_for_seed(seed);
    let radius = (total / n as f64).sqrt() / 2.0;
    let r2 = radius * radius;

    // Hash grid over accepted points; cells sized to the rejection radius so
    // only the 27 surrounding cells need checking.
    let cell = |p: &Point3<f64>| -> (i64, i64, i64) {
        (
            (p.x / radius).floor() as i64,
            (p.y / radius).floor() as i64,
            (p.z / radius).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut accepted: Vec<Point3<f64>> = Vec::with_capacity(n);

    let mut attempts = n * ATTEMPTS_PER_SAMPLE;
    while accepted.len() < n && attempts > 0 {
        attempts -= 1;
        let p = draw_surface_point(mesh, &cumulative, total, &mut rng);
        let (cx, cy, cz) = cell(&p);
        let mut clear = true;
        'scan: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &i in bucket {
                            if dist2(&accepted[i], &p) < r2 {
                                clear = false;
                                break 'scan;
                            }
                        }
                    }
                }
            }
        }
        if clear {
            grid.entry((cx, cy, cz)).or_default().push(accepted.len());
            accepted.push(p);
        }
    }

    // Top up with unconstrained draws; exact output size matters more than
    // perfect spacing once the surface saturates.
    while accepted.len() < n {
        accepted.push(draw_surface_point(mesh, &cumulative, total, &mut rng));
    }

    Ok(PointCloud::new(accepted))
}

fn draw_surface_point(
    mesh: &TriMesh,
    cumulative: &[f64],
    total: f64,
    rng: &mut ChaCha8Rng,
) -> Point3<f64> {
    let target = rng.gen::<f64>() * total;
    let face = cumulative.partition_point(|&c| c < target).min(cumulative.len() - 1);
    let [a, b, c] = mesh.triangle(face);
    // Uniform barycentric point via the square-root trick.
    let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
    let s = r1.sqrt();
    let (wa, wb, wc) = (1.0 - s, s * (1.0 - r2), s * r2);
    Point3::from(a.coords * wa + b.coords * wb + c.coords * wc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    fn unit_cube() -> TriMesh {
        let v = |x: f64, y: f64, z: f64| Point3::new(x, y, z);
        let vertices = vec![
            v(0., 0., 0.),
            v(1., 0., 0.),
            v(1., 1., 0.),
            v(0., 1., 0.),
            v(0., 0., 1.),
            v(1., 0., 1.),
            v(1., 1., 1.),
            v(0., 1., 1.),
        ];
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        TriMesh::new(vertices, faces).unwrap()
    }

    #[test]
    fn returns_exactly_n_points_on_the_surface() {
        let mesh = unit_cube();
        let cloud = sample_surface_even(&mesh, 500, 8).unwrap();
        assert_eq!(cloud.len(), 500);
        for p in &cloud {
            // A cube surface point has at least one coordinate at 0 or 1.
            let on_face = (0..3).any(|i| p[i].abs() < 1e-12 || (p[i] - 1.0).abs() < 1e-12);
            assert!(on_face, "{p:?} not on the cube surface");
            for i in 0..3 {
            assert!((-1e-12..=1.0 + 1e-12).contains(&p[i]));
            }
        }
    }

    #[test]
    fn spacing_respects_the_rejection_radius_before_saturation() {
        let mesh = unit_cube();
        let n = 100;
        let cloud = sample_surface_even(&mesh, n, 3).unwrap();
        let radius = (mesh.total_area() / n as f64).sqrt() / 2.0;
        // At this density rejection never saturates on a cube, so all pairs
        // keep their distance.
        let mut violations = 0;
        for i in 0..cloud.len() {
            for j in (i + 1)..cloud.len() {
                if (cloud[i] - cloud[j]).norm() < radius {
                    violations += 1;
                }
            }
        }
        assert_eq!(violations, 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let mesh = unit_cube();
        let a = sample_surface_even(&mesh, 64, 5).unwrap();
        let b = sample_surface_even(&mesh, 64, 5).unwrap();
        assert_eq!(a, b);
        let c = sample_surface_even(&mesh, 64, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn area_weighting_across_faces() {
        // A mesh of two parallel squares, one 100x larger in area: samples
        // should land on it overwhelmingly.
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(10.0, 0.0, 0.0),
            Point3::new(10.0, 10.0, 0.0),
            Point3::new(0.0, 10.0, 0.0),
            Point3::new(0.0, 0.0, 5.0),
            Point3::new(1.0, 0.0, 5.0),
            Point3::new(1.0, 1.0, 5.0),
            Point3::new(0.0, 1.0, 5.0),
        ];
        let faces = vec![[0, 1, 2], [0, 2, 3], [4, 5, 6], [4, 6, 7]];
        let mesh = TriMesh::new(vertices, faces).unwrap();
        let cloud = sample_surface_even(&mesh, 1000, 11).unwrap();
        let on_big = cloud.iter().filter(|p| p.z.abs() < 1e-9).count();
        assert!(on_big > 950, "{on_big} of 1000 on the big face");
    }

    #[test]
    fn zero_area_mesh_errors() {
        // All three vertices collinear: zero area.
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        let mesh = TriMesh::new(vertices, vec![[0, 1, 2]]).unwrap();
        assert_eq!(sample_surface_even(&mesh, 10, 0), Err(GeometryError::DegenerateMesh));
    }
}
