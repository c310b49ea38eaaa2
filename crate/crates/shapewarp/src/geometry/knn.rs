//! k-nearest-neighbour queries between clouds.

use super::{GeometryError, KdTree};
use crate::cloud::PointCloud;

/// For every query point, the indices of its `k` nearest reference points,
/// ascending by distance with exact ties broken towards the lower index.
pub fn k_nearest_neighbors(
    queries: &PointCloud,
    reference: &PointCloud,
    k: usize,
) -> Result<Vec<Vec<usize>>, GeometryError> {
    if k == 0 || k > reference.len() {
        return Err(GeometryError::InsufficientPoints {
            requested: k,
            available: reference.len(),
        });
    }
    let tree = KdTree::build(reference.points());
    Ok(queries
        .iter()
        .map(|q| tree.k_nearest(q, k).into_iter().map(|(i, _)| i).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;
    use rand::Rng;

    #[test]
    fn orders_by_distance_then_index() {
        let reference = PointCloud::from_coords(&[
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [-2.0, 0.0, 0.0], // same distance from the query as index 1
            [5.0, 0.0, 0.0],
        ]);
        let queries = PointCloud::from_coords(&[[0.0, 0.0, 0.0]]);
        let nn = k_nearest_neighbors(&queries, &reference, 3).unwrap();
        assert_eq!(nn, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn k_equals_reference_size_returns_full_ranking() {
        let reference = PointCloud::from_coords(&[[1.0, 0.0, 0.0], [3.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let queries = PointCloud::from_coords(&[[0.0, 0.0, 0.0]]);
        let nn = k_nearest_neighbors(&queries, &reference, 3).unwrap();
        assert_eq!(nn, vec![vec![0, 2, 1]]);
    }

    #[test]
    fn insufficient_reference_points() {
        let reference = PointCloud::from_coords(&[[0.0, 0.0, 0.0]]);
        let queries = PointCloud::from_coords(&[[0.0, 0.0, 0.0]]);
        assert_eq!(
            k_nearest_neighbors(&queries, &reference, 2),
            Err(GeometryError::InsufficientPoints { requested: 2, available: 1 })
        );
        assert!(k_nearest_neighbors(&queries, &reference, 0).is_err());
    }

    #[test]
    fn matches_brute_force_on_random_clouds() {
        let mut rng = crate::rng::rng_for_seed(17);
        let reference: Vec<Point3<f64>> = (0..200)
            .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        let queries: Vec<Point3<f64>> = (0..40)
            .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        let got =
            k_nearest_neighbors(&PointCloud::new(queries.clone()), &PointCloud::new(reference.clone()), 5)
                .unwrap();
        for (q, row) in queries.iter().zip(&got) {
            let mut all: Vec<(f64, usize)> = reference
                .iter()
                .enumerate()
                .map(|(i, p)| (super::super::dist2(q, p), i))
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let expected: Vec<usize> = all.iter().take(5).map(|&(_, i)| i).collect();
            assert_eq!(*row, expected);
        }
    }
}
