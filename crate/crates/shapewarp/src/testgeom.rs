//! Small synthetic meshes shared across the crate's unit tests.

use nalgebra::{Point3, Vector3};

use crate::mesh::TriMesh;

/// A closed box surface built from six n×n grids, with every vertex run
/// through `deform`. Shared vertices along cube edges are duplicated, which
/// none of the registration or sampling code minds.
pub(crate) fn grid_box(n: usize, deform: impl Fn(Point3<f64>) -> Point3<f64>) -> TriMesh {
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

/// A family of progressively stretched and bent boxes: the shapes the warp
/// and inference tests learn their spaces from.
pub(crate) fn box_family(k: usize) -> Vec<TriMesh> {
    (0..k)
        .map(|i| {
            let s = 1.0 + 0.12 * i as f64;
            let bend = 0.08 * i as f64;
            grid_box(3, move |p| Point3::new(p.x, s * p.y + bend * (2.0 * p.x).sin(), p.z))
        })
        .collect()
}

/// Like [`box_family`] but with no symmetry left, so a pose estimate cannot
/// hide behind an equivalent flipped solution.
pub(crate) fn skew_family(k: usize) -> Vec<TriMesh> {
    (0..k)
        .map(|i| {
            let s = 1.0 + 0.15 * i as f64;
            grid_box(3, move |p| {
                Point3::new(p.x + 0.3 * p.y * p.y, s * p.y, 0.6 * p.z + 0.1 * (3.0 * p.x).sin())
            })
        })
        .collect()
}
