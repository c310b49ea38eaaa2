//! Density-based clustering for point-cloud segmentation.

use std::collections::VecDeque;

use super::KdTree;
use crate::cloud::PointCloud;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Label {
    Unvisited,
    Noise,
    Cluster(usize),
}

/// DBSCAN over a point cloud. Returns one label per point: `Some(cluster_id)`
/// or `None` for noise.
///
/// Neighbourhoods are closed balls (`distance ≤ eps`) including the point
/// itself, and a point is a core point when its neighbourhood holds at least
/// `min_pts` points. Cluster ids are canonical: clusters are numbered 0, 1, …
/// by the smallest point index they contain, so the labelling is a pure
/// function of the input.
pub fn dbscan(cloud: &PointCloud, eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = cloud.len();
    if n == 0 {
        return Vec::new();
    }
    let tree = KdTree::build(cloud.points());
    let eps2 = eps * eps;
    let mut labels = vec![Label::Unvisited; n];
    let mut next_cluster = 0usize;

    for i in 0..n {
        if labels[i] != Label::Unvisited {
            continue;
        }
        let neighbors = tree.within_radius(&cloud[i], eps2);
        if neighbors.len() < min_pts {
            labels[i] = Label::Noise;
            continue;
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[i] = Label::Cluster(cluster);
        let mut queue: VecDeque<usize> = neighbors.into_iter().collect();
        while let Some(j) = queue.pop_front() {
            match labels[j] {
                Label::Cluster(_) => continue,
                // Border points join the first cluster that reaches them.
                Label::Noise | Label::Unvisited => {
                    let was_unvisited = labels[j] == Label::Unvisited;
                    labels[j] = Label::Cluster(cluster);
                    if was_unvisited {
                        let reach = tree.within_radius(&cloud[j], eps2);
                        if reach.len() >= min_pts {
                            queue.extend(reach);
                        }
                    }
                }
            }
        }
    }

    canonicalize(labels, n)
}

/// Renumbers clusters by the smallest member index.
fn canonicalize(labels: Vec<Label>, n: usize) -> Vec<Option<usize>> {
    let mut first_member: Vec<(usize, usize)> = Vec::new(); // (min index, raw id)
    let mut seen = vec![false; n];
    for (i, l) in labels.iter().enumerate() {
        if let Label::Cluster(c) = l {
            if !seen[*c] {
                seen[*c] = true;
                first_member.push((i, *c));
            }
        }
    }
    first_member.sort_unstable();
    let mut remap = vec![usize::MAX; n];
    for (new_id, &(_, raw)) in first_member.iter().enumerate() {
        remap[raw] = new_id;
    }
    labels
        .into_iter()
        .map(|l| match l {
            Label::Cluster(c) => Some(remap[c]),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;
    use rand::Rng;

    #[test]
    fn two_separated_blobs_form_two_clusters() {
        let mut rng = crate::rng::rng_for_seed(1);
        let mut pts = Vec::new();
        for _ in 0..50 {
            pts.push(Point3::new(rng.gen::<f64>() * 0.1, rng.gen::<f64>() * 0.1, 0.0));
        }
        for _ in 0..50 {
            // 10 eps away with eps = 0.1
            pts.push(Point3::new(1.0 + rng.gen::<f64>() * 0.1, rng.gen::<f64>() * 0.1, 0.0));
        }
        let labels = dbscan(&PointCloud::new(pts), 0.1, 3);
        assert!(labels[..50].iter().all(|l| *l == Some(0)));
        assert!(labels[50..].iter().all(|l| *l == Some(1)));
    }

    #[test]
    fn chain_within_eps_is_one_cluster() {
        let pts: Vec<Point3<f64>> =
            (0..30).map(|i| Point3::new(i as f64 * 0.09, 0.0, 0.0)).collect();
        let labels = dbscan(&PointCloud::new(pts), 0.1, 1);
        assert!(labels.iter().all(|l| *l == Some(0)));
    }

    #[test]
    fn isolated_point_is_noise() {
        let mut pts: Vec<Point3<f64>> =
            (0..10).map(|i| Point3::new(i as f64 * 0.05, 0.0, 0.0)).collect();
        pts.push(Point3::new(100.0, 0.0, 0.0));
        let labels = dbscan(&PointCloud::new(pts), 0.1, 2);
        assert_eq!(labels[10], None);
        assert!(labels[..10].iter().all(|l| *l == Some(0)));
    }

    #[test]
    fn ids_follow_smallest_member_index() {
        // Second blob listed first in the array gets cluster id 0.
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push(Point3::new(10.0 + i as f64 * 0.01, 0.0, 0.0));
        }
        for i in 0..5 {
            pts.push(Point3::new(i as f64 * 0.01, 0.0, 0.0));
        }
        let labels = dbscan(&PointCloud::new(pts), 0.05, 2);
        assert!(labels[..5].iter().all(|l| *l == Some(0)));
        assert!(labels[5..].iter().all(|l| *l == Some(1)));
    }

    #[test]
    fn border_point_shared_by_two_dense_regions_is_assigned_deterministically() {
        // A sparse point between two dense blobs, within eps of both: it must
        // always land in the same cluster on re-runs.
        let mut pts = Vec::new();
        for i in 0..4 {
            pts.push(Point3::new(-0.2 - i as f64 * 0.01, 0.0, 0.0));
        }
        pts.push(Point3::new(0.0, 0.0, 0.0)); // border point, index 4
        for i in 0..4 {
            pts.push(Point3::new(0.2 + i as f64 * 0.01, 0.0, 0.0));
        }
        let cloud = PointCloud::new(pts);
        let a = dbscan(&cloud, 0.21, 4);
        let b = dbscan(&cloud, 0.21, 4);
        assert_eq!(a, b);
        assert_eq!(a[4], Some(0)); // claimed by the cluster seeded first
    }

    #[test]
    fn empty_cloud() {
        assert!(dbscan(&PointCloud::new(vec![]), 1.0, 1).is_empty());
    }
}
