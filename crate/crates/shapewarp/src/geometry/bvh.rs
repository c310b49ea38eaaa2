//! Bounding-volume hierarchy over mesh triangles: closest-point, proximity
//! and containment queries used by contact extraction and placement scoring.

use nalgebra::{Point3, Vector3};

use super::primitives::{
    closest_point_on_triangle, closest_points_on_triangles, ray_triangle_intersection,
};
use crate::mesh::TriMesh;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Point3<f64>,
    max: Point3<f64>,
}

impl Aabb {
    fn of_triangle(t: &[Point3<f64>; 3]) -> Aabb {
        let mut min = t[0];
        let mut max = t[0];
        for p in &t[1..] {
            for i in 0..3 {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        Aabb { min, max }
    }

    fn merge(&self, other: &Aabb) -> Aabb {
        let mut min = self.min;
        let mut max = self.max;
        for i in 0..3 {
            min[i] = min[i].min(other.min[i]);
            max[i] = max[i].max(other.max[i]);
        }
        Aabb { min, max }
    }

    fn dist2_to_point(&self, p: &Point3<f64>) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let gap = if p[i] < self.min[i] {
                self.min[i] - p[i]
            } else if p[i] > self.max[i] {
                p[i] - self.max[i]
            } else {
                0.0
            };
            d2 += gap * gap;
        }
        d2
    }

    fn dist2_to_aabb(&self, other: &Aabb) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let gap = (self.min[i] - other.max[i]).max(other.min[i] - self.max[i]).max(0.0);
            d2 += gap * gap;
        }
        d2
    }

    /// Slab test; `inv_dir` holds 1/dir per axis (±inf for zero components).
    fn hit_by_ray(&self, origin: &Point3<f64>, inv_dir: &Vector3<f64>) -> bool {
        let mut tmin = 0.0f64;
        let mut tmax = f64::INFINITY;
        for i in 0..3 {
            let t1 = (self.min[i] - origin[i]) * inv_dir[i];
            let t2 = (self.max[i] - origin[i]) * inv_dir[i];
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            tmin = tmin.max(lo);
            tmax = tmax.min(hi);
            if tmin > tmax {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
struct Node {
    aabb: Aabb,
    /// Children node ids; `u32::MAX` marks a leaf.
    left: u32,
    right: u32,
    /// Face-id range into `order` (leaves only).
    start: u32,
    end: u32,
}

/// A point found in contact between two meshes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPair {
    pub point_a: Point3<f64>,
    pub point_b: Point3<f64>,
    pub distance: f64,
    pub face_a: usize,
    pub face_b: usize,
}

/// An immutable BVH over a mesh's triangles.
#[derive(Debug, Clone)]
pub struct MeshBvh {
    triangles: Vec<[Point3<f64>; 3]>,
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: u32,
}

const LEAF_SIZE: usize = 4;

impl MeshBvh {
    pub fn build(mesh: &TriMesh) -> MeshBvh {
        let triangles: Vec<[Point3<f64>; 3]> =
            (0..mesh.face_count()).map(|f| mesh.triangle(f)).collect();
        assert!(!triangles.is_empty(), "BVH over an empty mesh");
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let centroids: Vec<Point3<f64>> = triangles
            .iter()
            .map(|t| Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0))
            .collect();
        let mut nodes = Vec::new();
        let len = order.len();
        let root = build_rec(&triangles, &centroids, &mut order, 0, len, &mut nodes);
        MeshBvh { triangles, order, nodes, root }
    }

    pub fn triangle(&self, face: usize) -> &[Point3<f64>; 3] {
        &self.triangles[face]
    }

    /// Closest surface point to `p`: `(distance, face id, point)`. Equidistant
    /// faces resolve to the lowest face id.
    pub fn closest_point(&self, p: &Point3<f64>) -> (f64, usize, Point3<f64>) {
        let mut best = (f64::INFINITY, usize::MAX, *p);
        self.closest_rec(self.root, p, &mut best);
        (best.0.sqrt(), best.1, best.2)
    }

    fn closest_rec(&self, node: u32, p: &Point3<f64>, best: &mut (f64, usize, Point3<f64>)) {
        let n = &self.nodes[node as usize];
        if n.left == u32::MAX {
            for &f in &self.order[n.start as usize..n.end as usize] {
                let t = &self.triangles[f as usize];
                let q = closest_point_on_triangle(p, &t[0], &t[1], &t[2]);
                let d2 = (p - q).norm_squared();
                if (d2, f as usize) < (best.0, best.1) {
                    *best = (d2, f as usize, q);
                }
            }
            return;
        }
        let (l, r) = (n.left, n.right);
        let dl = self.nodes[l as usize].aabb.dist2_to_point(p);
        let dr = self.nodes[r as usize].aabb.dist2_to_point(p);
        let (first, second, d_second) = if dl <= dr { (l, r, dr) } else { (r, l, dl) };
        self.closest_rec(first, p, best);
        if d_second <= best.0 {
            self.closest_rec(second, p, best);
        }
    }

    /// Minimum distance between the two surfaces.
    pub fn min_distance(a: &MeshBvh, b: &MeshBvh) -> f64 {
        let mut best = f64::INFINITY;
        min_dist_rec(a, a.root, b, b.root, &mut best);
        best
    }

    /// All closest-point pairs between triangles of `a` and `b` that are at
    /// most `eps` apart, in deterministic traversal order.
    pub fn pairs_within(a: &MeshBvh, b: &MeshBvh, eps: f64) -> Vec<ContactPair> {
        let mut out = Vec::new();
        pairs_rec(a, a.root, b, b.root, eps, &mut out);
        out
    }

    /// Parity test: is `p` inside the closed surface?
    ///
    /// Casts a fixed skew ray and counts crossings; retries along fallback
    /// directions if a hit lands suspiciously close to a triangle boundary
    /// (which would make the count unreliable).
    pub fn contains(&self, p: &Point3<f64>) -> bool {
        // Skew directions make hits on edges/vertices of axis-aligned
        // geometry vanishingly unlikely.
        const DIRS: [[f64; 3]; 3] = [
            [0.5377671873, 0.8132437151, 0.2224590105],
            [-0.2719826342, 0.4313924371, 0.8601972471],
            [0.7136421342, -0.1234976541, 0.6895210234],
        ];
        'dirs: for d in DIRS {
            let dir = Vector3::new(d[0], d[1], d[2]);
            let inv = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
            let mut crossings = 0usize;
            let mut stack = vec![self.root];
            while let Some(id) = stack.pop() {
                let n = &self.nodes[id as usize];
                if !n.aabb.hit_by_ray(p, &inv) {
                    continue;
                }
                if n.left == u32::MAX {
                    for &f in &self.order[n.start as usize..n.end as usize] {
                        let t = &self.triangles[f as usize];
                        if let Some(hit) = ray_triangle_intersection(p, &dir, &t[0], &t[1], &t[2]) {
                            // A hit right at the origin or grazing a border
                            // is ambiguous: switch direction.
                            if hit < 1e-12 || near_triangle_border(p, &dir, hit, t) {
                                continue 'dirs;
                            }
                            crossings += 1;
                        }
                    }
                } else {
                    stack.push(n.left);
                    stack.push(n.right);
                }
            }
            return crossings % 2 == 1;
        }
        // All rays were ambiguous; treat the point as on the surface.
        false
    }

    /// Distance to the surface, negative inside the closed mesh.
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        let (d, _, _) = self.closest_point(p);
        if self.contains(p) { -d } else { d }
    }
}

fn near_triangle_border(
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
    t_hit: f64,
    tri: &[Point3<f64>; 3],
) -> bool {
    let hit = origin + dir * t_hit;
    let (a, b, c) = (tri[0], tri[1], tri[2]);
    let area2 = (b - a).cross(&(c - a)).norm();
    if area2 <= 0.0 {
        return true;
    }
    let wa = (b - hit).cross(&(c - hit)).norm() / area2;
    let wb = (c - hit).cross(&(a - hit)).norm() / area2;
    let wc = (a - hit).cross(&(b - hit)).norm() / area2;
    let min_bary = wa.min(wb).min(wc);
    min_bary < 1e-9
}

fn build_rec(
    triangles: &[[Point3<f64>; 3]],
    centroids: &[Point3<f64>],
    order: &mut [u32],
    offset: usize,
    len: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let mut aabb = Aabb::of_triangle(&triangles[order[0] as usize]);
    for &f in order[1..len].iter() {
        aabb = aabb.merge(&Aabb::of_triangle(&triangles[f as usize]));
    }
    if len <= LEAF_SIZE {
        nodes.push(Node {
            aabb,
            left: u32::MAX,
            right: u32::MAX,
            start: offset as u32,
            end: (offset + len) as u32,
        });
        return (nodes.len() - 1) as u32;
    }
    // Longest axis of the centroid spread, median split, deterministic ties.
    let mut cmin = [f64::INFINITY; 3];
    let mut cmax = [f64::NEG_INFINITY; 3];
    for &f in order[..len].iter() {
        for i in 0..3 {
            cmin[i] = cmin[i].min(centroids[f as usize][i]);
            cmax[i] = cmax[i].max(centroids[f as usize][i]);
        }
    }
    let mut axis = 0;
    for i in 1..3 {
        if cmax[i] - cmin[i] > cmax[axis] - cmin[axis] {
            axis = i;
        }
    }
    let mid = len / 2;
    order[..len].select_nth_unstable_by(mid, |&x, &y| {
        centroids[x as usize][axis]
            .total_cmp(&centroids[y as usize][axis])
            .then(x.cmp(&y))
    });
    let (left_s, right_s) = order[..len].split_at_mut(mid);
    let left = build_rec(triangles, centroids, left_s, offset, mid, nodes);
    let right = build_rec(triangles, centroids, right_s, offset + mid, len - mid, nodes);
    nodes.push(Node {
        aabb,
        left,
        right,
        start: offset as u32,
        end: (offset + len) as u32,
    });
    (nodes.len() - 1) as u32
}

fn min_dist_rec(a: &MeshBvh, na: u32, b: &MeshBvh, nb: u32, best: &mut f64) {
    let node_a = &a.nodes[na as usize];
    let node_b = &b.nodes[nb as usize];
    if node_a.aabb.dist2_to_aabb(&node_b.aabb) >= *best * *best {
        return;
    }
    let leaf_a = node_a.left == u32::MAX;
    let leaf_b = node_b.left == u32::MAX;
    if leaf_a && leaf_b {
        for &fa in &a.order[node_a.start as usize..node_a.end as usize] {
            for &fb in &b.order[node_b.start as usize..node_b.end as usize] {
                let (_, _, d) =
                    closest_points_on_triangles(&a.triangles[fa as usize], &b.triangles[fb as usize]);
                if d < *best {
                    *best = d;
                }
            }
        }
        return;
    }
    // Descend the larger/non-leaf side first.
    if leaf_b || (!leaf_a && node_a.end - node_a.start >= node_b.end - node_b.start) {
        min_dist_rec(a, node_a.left, b, nb, best);
        min_dist_rec(a, node_a.right, b, nb, best);
    } else {
        min_dist_rec(a, na, b, node_b.left, best);
        min_dist_rec(a, na, b, node_b.right, best);
    }
}

fn pairs_rec(a: &MeshBvh, na: u32, b: &MeshBvh, nb: u32, eps: f64, out: &mut Vec<ContactPair>) {
    let node_a = &a.nodes[na as usize];
    let node_b = &b.nodes[nb as usize];
    if node_a.aabb.dist2_to_aabb(&node_b.aabb) > eps * eps {
        return;
    }
    let leaf_a = node_a.left == u32::MAX;
    let leaf_b = node_b.left == u32::MAX;
    if leaf_a && leaf_b {
        for &fa in &a.order[node_a.start as usize..node_a.end as usize] {
            for &fb in &b.order[node_b.start as usize..node_b.end as usize] {
                let (p, q, d) =
                    closest_points_on_triangles(&a.triangles[fa as usize], &b.triangles[fb as usize]);
                if d <= eps {
                    out.push(ContactPair {
                        point_a: p,
                        point_b: q,
                        distance: d,
                        face_a: fa as usize,
                        face_b: fb as usize,
                    });
                }
            }
        }
        return;
    }
    if leaf_b || (!leaf_a && node_a.end - node_a.start >= node_b.end - node_b.start) {
        pairs_rec(a, node_a.left, b, nb, eps, out);
        pairs_rec(a, node_a.right, b, nb, eps, out);
    } else {
        pairs_rec(a, na, b, node_b.left, eps, out);
        pairs_rec(a, na, b, node_b.right, eps, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn cube(center: [f64; 3], half: f64) -> TriMesh {
        let (cx, cy, cz) = (center[0], center[1], center[2]);
        let v = |x: f64, y: f64, z: f64| Point3::new(cx + x * half, cy + y * half, cz + z * half);
        let vertices = vec![
            v(-1., -1., -1.),
            v(1., -1., -1.),
            v(1., 1., -1.),
            v(-1., 1., -1.),
            v(-1., -1., 1.),
            v(1., -1., 1.),
            v(1., 1., 1.),
            v(-1., 1., 1.),
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
    fn closest_point_matches_brute_force() {
        let mesh = cube([0.0, 0.0, 0.0], 0.5);
        let bvh = MeshBvh::build(&mesh);
        let mut rng = crate::rng::rng_for_seed(9);
        for _ in 0..200 {
            let p = Point3::new(
                (rng.gen::<f64>() - 0.5) * 4.0,
                (rng.gen::<f64>() - 0.5) * 4.0,
                (rng.gen::<f64>() - 0.5) * 4.0,
            );
            let (d, f, q) = bvh.closest_point(&p);
            let mut best = (f64::INFINITY, usize::MAX);
            for face in 0..mesh.face_count() {
                let t = mesh.triangle(face);
                let cq = closest_point_on_triangle(&p, &t[0], &t[1], &t[2]);
                let d2 = (p - cq).norm_squared();
                if (d2, face) < best {
                    best = (d2, face);
                }
            }
            assert_eq!(f, best.1);
            assert_abs_diff_eq!(d * d, best.0, epsilon = 1e-13);
            assert_abs_diff_eq!((p - q).norm(), d, epsilon = 1e-13);
        }
    }

    #[test]
    fn min_distance_between_separated_cubes() {
        let a = MeshBvh::build(&cube([0.0, 0.0, 0.0], 0.5));
        let b = MeshBvh::build(&cube([3.0, 0.0, 0.0], 0.5));
        assert_abs_diff_eq!(MeshBvh::min_distance(&a, &b), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pairs_within_finds_the_facing_faces() {
        let a = MeshBvh::build(&cube([0.0, 0.0, 0.0], 0.5));
        let b = MeshBvh::build(&cube([1.0005, 0.0, 0.0], 0.5));
        let pairs = MeshBvh::pairs_within(&a, &b, 1e-3);
        assert!(!pairs.is_empty());
        for pair in &pairs {
            assert!(pair.distance <= 1e-3);
            assert_abs_diff_eq!(pair.point_a.x, 0.5, epsilon = 1e-9);
            assert_abs_diff_eq!(pair.point_b.x, 0.5005, epsilon = 1e-9);
        }
        // Deterministic output.
        let again = MeshBvh::pairs_within(&a, &b, 1e-3);
        assert_eq!(pairs.len(), again.len());
        assert!(pairs.iter().zip(&again).all(|(x, y)| x == y));
    }

    #[test]
    fn containment_and_signed_distance() {
        let mesh = cube([0.0, 0.0, 0.0], 0.5);
        let bvh = MeshBvh::build(&mesh);
        assert!(bvh.contains(&Point3::new(0.0, 0.0, 0.0)));
        assert!(bvh.contains(&Point3::new(0.49, 0.49, 0.49)));
        assert!(!bvh.contains(&Point3::new(0.51, 0.0, 0.0)));
        assert!(!bvh.contains(&Point3::new(10.0, 10.0, 10.0)));
        assert_abs_diff_eq!(bvh.signed_distance(&Point3::new(0.0, 0.0, 0.0)), -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(bvh.signed_distance(&Point3::new(1.5, 0.0, 0.0)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn containment_on_random_points_matches_box_test() {
        let mesh = cube([0.1, -0.2, 0.3], 0.4);
        let bvh = MeshBvh::build(&mesh);
        let mut rng = crate::rng::rng_for_seed(10);
        for _ in 0..500 {
            let p = Point3::new(
                (rng.gen::<f64>() - 0.5) * 2.0,
                (rng.gen::<f64>() - 0.5) * 2.0,
                (rng.gen::<f64>() - 0.5) * 2.0,
            );
            let inside = (p.x - 0.1).abs() < 0.4 && (p.y + 0.2).abs() < 0.4 && (p.z - 0.3).abs() < 0.4;
            assert_eq!(bvh.contains(&p), inside, "{p:?}");
        }
    }
}
