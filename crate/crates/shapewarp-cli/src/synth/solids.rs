//! Watertight primitive solids used to assemble the synthetic object
//! families: surfaces of revolution, tori and axis-aligned cuboids. Every
//! builder returns a closed mesh with outward-facing winding.

use nalgebra::{Point3, Vector3};
use shapewarp::mesh::TriMesh;

fn signed_volume(vertices: &[Point3<f64>], faces: &[[usize; 3]]) -> f64 {
    let mut six_v = 0.0;
    for f in faces {
        let a = vertices[f[0]].coords;
        let b = vertices[f[1]].coords;
        let c = vertices[f[2]].coords;
        six_v += a.dot(&b.cross(&c));
    }
    six_v / 6.0
}

fn oriented_mesh(vertices: Vec<Point3<f64>>, mut faces: Vec<[usize; 3]>) -> TriMesh {
    if signed_volume(&vertices, &faces) < 0.0 {
        for f in faces.iter_mut() {
            f.swap(1, 2);
        }
    }
    let mesh = TriMesh::new(vertices, faces).expect("generated faces are valid");
    debug_assert!(mesh.is_watertight());
    mesh
}

/// Revolves a profile polyline around the +Y axis into a closed solid.
///
/// The first and last profile points must lie on the axis (radius 0) and all
/// interior points strictly off it; consecutive points must differ.
pub fn lathe(profile: &[(f64, f64)], segments: usize) -> TriMesh {
    assert!(profile.len() >= 3, "profile needs at least 3 points");
    assert!(segments >= 3, "need at least 3 angular segments");
    assert_eq!(profile[0].0, 0.0, "profile must start on the axis");
    assert_eq!(profile.last().unwrap().0, 0.0, "profile must end on the axis");
    let interior = &profile[1..profile.len() - 1];
    for w in profile.windows(2) {
        assert!(w[0] != w[1], "consecutive profile points must differ");
    }
    for &(r, _) in interior {
        assert!(r > 0.0, "interior profile points must be off the axis");
    }

    let mut vertices = Vec::with_capacity(2 + interior.len() * segments);
    vertices.push(Point3::new(0.0, profile[0].1, 0.0));
    for &(r, y) in interior {
        for s in 0..segments {
            let th = std::f64::consts::TAU * s as f64 / segments as f64;
            vertices.push(Point3::new(r * th.cos(), y, r * th.sin()));
        }
    }
    vertices.push(Point3::new(0.0, profile.last().unwrap().1, 0.0));
    let top_pole = vertices.len() - 1;
    let ring = |i: usize, s: usize| 1 + i * segments + (s % segments);

    let mut faces = Vec::with_capacity(2 * segments * interior.len());
    for s in 0..segments {
        faces.push([0, ring(0, s + 1), ring(0, s)]);
    }
    for i in 0..interior.len() - 1 {
        for s in 0..segments {
            let (a, b) = (ring(i, s), ring(i, s + 1));
            let (c, d) = (ring(i + 1, s + 1), ring(i + 1, s));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    let last = interior.len() - 1;
    for s in 0..segments {
        faces.push([top_pole, ring(last, s), ring(last, s + 1)]);
    }
    oriented_mesh(vertices, faces)
}

/// Revolves a closed profile loop (all radii > 0, implicit wrap-around)
/// around the +Y axis, producing a genus-1 solid.
pub fn lathe_loop(profile: &[(f64, f64)], segments: usize) -> TriMesh {
    assert!(profile.len() >= 3 && segments >= 3);
    for &(r, _) in profile {
        assert!(r > 0.0, "loop profiles may not touch the axis");
    }
    let m = profile.len();
    let mut vertices = Vec::with_capacity(m * segments);
    for &(r, y) in profile {
        for s in 0..segments {
            let th = std::f64::consts::TAU * s as f64 / segments as f64;
            vertices.push(Point3::new(r * th.cos(), y, r * th.sin()));
        }
    }
    let at = |i: usize, s: usize| (i % m) * segments + (s % segments);
    let mut faces = Vec::with_capacity(2 * m * segments);
    for i in 0..m {
        for s in 0..segments {
            let (a, b) = (at(i, s), at(i, s + 1));
            let (c, d) = (at(i + 1, s + 1), at(i + 1, s));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    oriented_mesh(vertices, faces)
}

/// Full torus around the +Y axis, centred at the origin: the tube of radius
/// `tube_radius` sweeps a circle of radius `loop_radius` in the XZ plane.
pub fn torus(loop_radius: f64, tube_radius: f64, arc_segments: usize, tube_segments: usize) -> TriMesh {
    assert!(loop_radius > tube_radius && tube_radius > 0.0);
    let profile: Vec<(f64, f64)> = (0..tube_segments)
        .map(|j| {
            let phi = std::f64::consts::TAU * j as f64 / tube_segments as f64;
            (loop_radius + tube_radius * phi.cos(), tube_radius * phi.sin())
        })
        .collect();
    lathe_loop(&profile, arc_segments)
}

/// Capped cylinder from y=0 to y=height around the +Y axis, with `rings`
/// evenly spaced wall bands.
pub fn capped_cylinder(radius: f64, height: f64, rings: usize, segments: usize) -> TriMesh {
    assert!(radius > 0.0 && height > 0.0 && rings >= 1);
    let mut profile = vec![(0.0, 0.0)];
    for i in 0..=rings {
        profile.push((radius, height * i as f64 / rings as f64));
    }
    profile.push((0.0, height));
    lathe(&profile, segments)
}

/// Axis-aligned rectangular solid between two corners.
pub fn cuboid(min: &Point3<f64>, max: &Point3<f64>) -> TriMesh {
    assert!(min.x < max.x && min.y < max.y && min.z < max.z);
    let v = |x: bool, y: bool, z: bool| {
        Point3::new(
            if x { max.x } else { min.x },
            if y { max.y } else { min.y },
            if z { max.z } else { min.z },
        )
    };
    // Index bit layout: x | y<<1 | z<<2.
    let vertices: Vec<Point3<f64>> = (0..8)
        .map(|i: usize| v(i & 1 != 0, i & 2 != 0, i & 4 != 0))
        .collect();
    let quads: [[usize; 4]; 6] = [
        [0, 2, 3, 1], // y min? — orientation fixed by oriented_mesh
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let mut faces = Vec::with_capacity(12);
    for q in quads {
        faces.push([q[0], q[1], q[2]]);
        faces.push([q[0], q[2], q[3]]);
    }
    oriented_mesh(vertices, faces)
}

/// Concatenates meshes into one (several disjoint closed shells).
pub fn merge(meshes: &[TriMesh]) -> TriMesh {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for m in meshes {
        let base = vertices.len();
        vertices.extend_from_slice(m.vertices());
        faces.extend(m.faces().iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
    }
    TriMesh::new(vertices, faces).expect("merged faces stay valid")
}

/// Rotation taking the +Y axis onto `dir` (which must not be anti-parallel
/// to +Y), as a rigid transform with the given translation.
pub fn y_axis_to(dir: &Vector3<f64>, translation: Vector3<f64>) -> shapewarp::transform::RigidTransform {
    let d = dir.normalize();
    let r = nalgebra::Rotation3::rotation_between(&Vector3::y(), &d)
        .expect("direction must not be anti-parallel to +Y");
    shapewarp::transform::RigidTransform::new(*r.matrix(), translation)
        .expect("rotation_between returns a proper rotation")
}
