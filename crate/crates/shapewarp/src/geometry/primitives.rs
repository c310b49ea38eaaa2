//! Low-level distance and intersection routines on triangles and segments.
//!
//! These are the exact kernels behind the mesh proximity queries; the
//! formulations follow the standard real-time collision detection recipes.

use nalgebra::{Point3, Vector3};

/// Closest point on triangle `(a, b, c)` to `p`, handling all Voronoi regions.
pub fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;

    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    // Interior: barycentric projection.
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Closest points between segments `p1q1` and `p2q2`.
pub fn closest_points_on_segments(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> (Point3<f64>, Point3<f64>) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);

    let (s, t);
    const EPS: f64 = 1e-300;
    if a <= EPS && e <= EPS {
        (s, t) = (0.0, 0.0);
    } else if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s_val = if denom != 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t_val = (b * s_val + f) / e;
            if t_val < 0.0 {
                t_val = 0.0;
                s_val = (-c / a).clamp(0.0, 1.0);
            } else if t_val > 1.0 {
                t_val = 1.0;
                s_val = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t) = (s_val, t_val);
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

/// Ray-triangle intersection (Möller–Trumbore). Returns the ray parameter
/// `t ≥ 0` of the hit, or `None`. `dir` need not be unit length.
pub fn ray_triangle_intersection(
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Option<f64> {
    const EPS: f64 = 1e-13;
    let ab = b - a;
    let ac = c - a;
    let pvec = dir.cross(&ac);
    let det = ab.dot(&pvec);
    if det.abs() < EPS {
        return None; // parallel to the triangle plane
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&ab);
    let v = dir.dot(&qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = ac.dot(&qvec) * inv_det;
    (t >= 0.0).then_some(t)
}

/// Closest points between two triangles and their distance. Exact for
/// disjoint triangles (the minimum over all vertex-face and edge-edge
/// candidates); for intersecting triangles returns a crossing point with
/// distance zero.
pub fn closest_points_on_triangles(
    t1: &[Point3<f64>; 3],
    t2: &[Point3<f64>; 3],
) -> (Point3<f64>, Point3<f64>, f64) {
    let mut best: (Point3<f64>, Point3<f64>, f64) = (t1[0], t2[0], f64::INFINITY);

    let mut consider = |p: Point3<f64>, q: Point3<f64>| {
        let d = (p - q).norm();
        if d < best.2 {
            best = (p, q, d);
        }
    };

    // Vertices of one against the face of the other.
    for &v in t1 {
        let q = closest_point_on_triangle(&v, &t2[0], &t2[1], &t2[2]);
        consider(v, q);
    }
    for &v in t2 {
        let p = closest_point_on_triangle(&v, &t1[0], &t1[1], &t1[2]);
        consider(p, v);
    }

    // All nine edge pairs.
    const EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];
    for &(i, j) in &EDGES {
        for &(k, l) in &EDGES {
            let (p, q) = closest_points_on_segments(&t1[i], &t1[j], &t2[k], &t2[l]);
            consider(p, q);
        }
    }

    // Piercing: an edge of one passing through the interior of the other is
    // not covered by the candidates above; detect it explicitly.
    if best.2 > 0.0 {
        for &(i, j) in &EDGES {
            let dir = t1[j] - t1[i];
            if let Some(t) = ray_triangle_intersection(&t1[i], &dir, &t2[0], &t2[1], &t2[2]) {
                if t <= 1.0 {
                    let hit = t1[i] + dir * t;
                    return (hit, hit, 0.0);
                }
            }
        }
        for &(i, j) in &EDGES {
            let dir = t2[j] - t2[i];
            if let Some(t) = ray_triangle_intersection(&t2[i], &dir, &t1[0], &t1[1], &t1[2]) {
                if t <= 1.0 {
                    let hit = t2[i] + dir * t;
                    return (hit, hit, 0.0);
                }
            }
        }
    }

    best
}
