//! A k-d tree over 3-D points.
//!
//! Queries are exact: they return the same results as a brute-force scan,
//! including tie ordering. Candidates are always compared as the pair
//! `(squared distance, index)`, so among equidistant points the lowest index
//! wins, and subtree pruning uses a strict `>` test so that subtrees at
//! exactly the current best distance are still visited.

use std::collections::BinaryHeap;

use nalgebra::Point3;

use super::dist2;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
struct Node {
    /// Split axis (0..3); unused for leaves.
    axis: u8,
    /// Splitting coordinate; unused for leaves.
    split: f64,
    /// Children as node indices; `u32::MAX` marks a leaf.
    left: u32,
    right: u32,
    /// Range into `order` covered by this subtree (leaf payload).
    start: u32,
    end: u32,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3<f64>>,
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: u32,
}

/// Totally ordered wrapper for finite distances.
#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl KdTree {
    /// Builds a tree over `points`. Queries report indices into this slice.
    pub fn build(points: &[Point3<f64>]) -> Self {
        let points = points.to_vec();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        let root = if points.is_empty() {
            u32::MAX
        } else {
            let len = order.len();
            build_recursive(&points, &mut order, 0, len, &mut nodes)
        };
        Self { points, order, nodes, root }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the point nearest to `query` and its squared distance.
    /// Ties are broken towards the lowest index. Panics on an empty tree.
    pub fn nearest(&self, query: &Point3<f64>) -> (usize, f64) {
        assert!(!self.is_empty(), "nearest() on an empty KdTree");
        let mut best = (f64::INFINITY, usize::MAX);
        self.nearest_rec(self.root, query, &mut best);
        (best.1, best.0)
    }

    fn nearest_rec(&self, node: u32, query: &Point3<f64>, best: &mut (f64, usize)) {
        let n = &self.nodes[node as usize];
        if n.left == u32::MAX {
            for &i in &self.order[n.start as usize..n.end as usize] {
                let d = dist2(query, &self.points[i as usize]);
                if (d, i as usize) < *best {
                    *best = (d, i as usize);
                }
            }
            return;
        }
        let delta = query[n.axis as usize] - n.split;
        let (near, far) = if delta < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.nearest_rec(near, query, best);
        if delta * delta > best.0 {
            return;
        }
        self.nearest_rec(far, query, best);
    }

    /// The `k` nearest points, ascending by `(squared distance, index)`.
    /// Panics if the tree holds fewer than `k` points.
    pub fn k_nearest(&self, query: &Point3<f64>, k: usize) -> Vec<(usize, f64)> {
        assert!(k <= self.len(), "k_nearest() with k > tree size");
        if k == 0 {
            return Vec::new();
        }
        // Max-heap of (distance, index): the root is the worst kept candidate.
        let mut heap: BinaryHeap<(OrdF64, usize)> = BinaryHeap::with_capacity(k + 1);
        self.k_nearest_rec(self.root, query, k, &mut heap);
        let mut out: Vec<(usize, f64)> = heap.into_iter().map(|(d, i)| (i, d.0)).collect();
        out.sort_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap());
        out
    }

    fn k_nearest_rec(
        &self,
        node: u32,
        query: &Point3<f64>,
        k: usize,
        heap: &mut BinaryHeap<(OrdF64, usize)>,
    ) {
        let n = &self.nodes[node as usize];
        if n.left == u32::MAX {
            for &i in &self.order[n.start as usize..n.end as usize] {
                let d = dist2(query, &self.points[i as usize]);
                let cand = (OrdF64(d), i as usize);
                if heap.len() < k {
                    heap.push(cand);
                } else if cand < *heap.peek().unwrap() {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        let delta = query[n.axis as usize] - n.split;
        let (near, far) = if delta < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.k_nearest_rec(near, query, k, heap);
        if heap.len() == k && delta * delta > heap.peek().unwrap().0 .0 {
            return;
        }
        self.k_nearest_rec(far, query, k, heap);
    }

    /// Indices of all points with squared distance ≤ `radius2`, ascending.
    pub fn within_radius(&self, query: &Point3<f64>, radius2: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.is_empty() {
            self.radius_rec(self.root, query, radius2, &mut out);
            out.sort_unstable();
        }
        out
    }

    fn radius_rec(&self, node: u32, query: &Point3<f64>, radius2: f64, out: &mut Vec<usize>) {
        let n = &self.nodes[node as usize];
        if n.left == u32::MAX {
            for &i in &self.order[n.start as usize..n.end as usize] {
                if dist2(query, &self.points[i as usize]) <= radius2 {
                    out.push(i as usize);
                }
            }
            return;
        }
        let delta = query[n.axis as usize] - n.split;
        let (near, far) = if delta < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.radius_rec(near, query, radius2, out);
        if delta * delta > radius2 {
            return;
        }
        self.radius_rec(far, query, radius2, out);
    }
}

fn build_recursive(
    points: &[Point3<f64>],
    order: &mut [u32],
    offset: usize,
    len: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    if len <= LEAF_SIZE {
        nodes.push(Node {
            axis: 0,
            split: 0.0,
            left: u32::MAX,
            right: u32::MAX,
            start: offset as u32,
            end: (offset + len) as u32,
        });
        return (nodes.len() - 1) as u32;
    }

    // Split on the axis with the largest extent; break exact coordinate ties
    // by index so the tree shape is deterministic.
    let (axis, _) = {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for &i in order[..len].iter() {
            let p = &points[i as usize];
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        let mut best = (0, max[0] - min[0]);
        for a in 1..3 {
            let extent = max[a] - min[a];
            if extent > best.1 {
                best = (a, extent);
            }
        }
        best
    };

    let mid = len / 2;
    order[..len].select_nth_unstable_by(mid, |&a, &b| {
        let ca = points[a as usize][axis];
        let cb = points[b as usize][axis];
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let split = points[order[mid] as usize][axis];

    let (left_slice, right_slice) = order[..len].split_at_mut(mid);
    let left = build_recursive(points, left_slice, offset, mid, nodes);
    let right = build_recursive(points, right_slice, offset + mid, len - mid, nodes);
    nodes.push(Node {
        axis: axis as u8,
        split,
        left,
        right,
        start: offset as u32,
        end: (offset + len) as u32,
    });
    (nodes.len() - 1) as u32
}

/// Brute-force nearest neighbour with the same tie rule as the tree.
/// Kept here so other modules can cross-check accelerated paths.
#[cfg(test)]
pub(crate) fn nearest_brute_force(points: &[Point3<f64>], query: &Point3<f64>) -> (usize, f64) {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, p) in points.iter().enumerate() {
        let d = dist2(query, p);
        if (d, i) < best {
            best = (d, i);
        }
    }
    (best.1, best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Point3<f64>> {
        let mut rng = crate::rng::rng_for_seed(seed);
        (0..n)
            .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
            .collect()
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts = random_points(500, 11);
        let tree = KdTree::build(&pts);
        let queries = random_points(200, 12);
        for q in &queries {
            assert_eq!(tree.nearest(q), nearest_brute_force(&pts, q));
        }
    }

    #[test]
    fn nearest_breaks_ties_by_lowest_index() {
        // Two identical points: index 0 must win, whatever the tree layout.
        let mut pts = random_points(100, 3);
        pts[57] = pts[0];
        let tree = KdTree::build(&pts);
        let (i, _) = tree.nearest(&pts[57]);
        assert_eq!(i, 0);
    }

    #[test]
    fn k_nearest_matches_sorted_brute_force() {
        let pts = random_points(300, 21);
        let tree = KdTree::build(&pts);
        for q in &random_points(50, 22) {
            let got = tree.k_nearest(q, 7);
            let mut all: Vec<(usize, f64)> =
                pts.iter().enumerate().map(|(i, p)| (i, dist2(q, p))).collect();
            all.sort_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap());
            all.truncate(7);
            assert_eq!(got, all);
        }
    }

    #[test]
    fn radius_query_is_inclusive_and_sorted() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let tree = KdTree::build(&pts);
        // Radius exactly 1: boundary points included.
        let hits = tree.within_radius(&pts[0], 1.0);
        assert_eq!(hits, vec![0, 1, 3]);
    }

    #[test]
    fn handles_tiny_trees() {
        let pts = random_points(3, 5);
        let tree = KdTree::build(&pts);
        assert_eq!(tree.k_nearest(&pts[1], 3).len(), 3);
        assert_eq!(tree.nearest(&pts[2]).0, 2);
    }
}
