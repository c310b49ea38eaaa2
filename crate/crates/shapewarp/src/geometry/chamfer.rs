//! One-sided Chamfer distance.

use super::{GeometryError, KdTree, dist2};
use crate::cloud::PointCloud;

/// Threshold below which a brute-force scan beats building a tree.
const BRUTE_FORCE_LIMIT: usize = 64;

/// Mean distance from each point of `b` to its nearest neighbour in `a`:
///
/// `D(a, b) = (1/|b|) Σ_k min_l dist(a_l, b_k)`
///
/// With `squared` the per-point distances are squared before averaging, which
/// is the variant the shape/pose objective and canonical-object selection use;
/// the plain variant reports an interpretable average distance in metres.
///
/// The reduction is evaluated in point order with distances computed exactly
/// as in a brute-force double loop, so accelerated and naive evaluation agree
/// bit for bit.
pub fn one_sided_chamfer(
    a: &PointCloud,
    b: &PointCloud,
    squared: bool,
) -> Result<f64, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }

    let mut sum = 0.0;
    if a.len() <= BRUTE_FORCE_LIMIT {
        for q in b {
            let mut best = f64::INFINITY;
            for p in a {
                let d = dist2(p, q);
                if d < best {
                    best = d;
                }
            }
            sum += if squared { best } else { best.sqrt() };
        }
    } else {
        let tree = KdTree::build(a.points());
        for q in b {
            let (_, d) = tree.nearest(q);
            sum += if squared { d } else { d.sqrt() };
        }
    }
    Ok(sum / b.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Point3;
    use rand::Rng;

    #[test]
    fn worked_single_point_example() {
        let a = PointCloud::from_coords(&[[0.0, 0.0, 0.0]]);
        let b = PointCloud::from_coords(&[[1.0, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        assert_eq!(one_sided_chamfer(&a, &b, false).unwrap(), 2.0);
        assert_eq!(one_sided_chamfer(&a, &b, true).unwrap(), 5.0);
    }

    #[test]
    fn asymmetry() {
        // b ⊂ a makes D(a, b) zero while D(b, a) is not.
        let a = PointCloud::from_coords(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let b = PointCloud::from_coords(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(one_sided_chamfer(&a, &b, false).unwrap(), 0.0);
        assert!(one_sided_chamfer(&b, &a, false).unwrap() > 0.0);
    }

    #[test]
    fn identical_clouds_give_zero() {
        let a = PointCloud::from_coords(&[[0.1, 0.2, 0.3], [-1.0, 0.5, 2.0]]);
        assert_eq!(one_sided_chamfer(&a, &a.clone(), true).unwrap(), 0.0);
    }

    #[test]
    fn empty_inputs_error() {
        let a = PointCloud::new(vec![]);
        let b = PointCloud::from_coords(&[[0.0, 0.0, 0.0]]);
        assert_eq!(one_sided_chamfer(&a, &b, false), Err(GeometryError::EmptyCloud));
        assert_eq!(one_sided_chamfer(&b, &a, false), Err(GeometryError::EmptyCloud));
    }

    #[test]
    fn accelerated_path_matches_brute_force_exactly() {
        let mut rng = crate::rng::rng_for_seed(40);
        // Large enough to take the tree path.
        let a: Vec<Point3<f64>> = (0..400)
            .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        let b: Vec<Point3<f64>> = (0..250)
            .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        for squared in [false, true] {
            let mut expected = 0.0;
            for q in &b {
                let mut best = f64::INFINITY;
                for p in &a {
                    let d = dist2(p, q);
                    if d < best {
                        best = d;
                    }
                }
                expected += if squared { best } else { best.sqrt() };
            }
            expected /= b.len() as f64;
            let got = one_sided_chamfer(
                &PointCloud::new(a.clone()),
                &PointCloud::new(b.clone()),
                squared,
            )
            .unwrap();
            assert_eq!(got, expected, "squared={squared}");
        }
        // Also pin down a sanity scale: uniform unit-cube clouds are close.
        let d = one_sided_chamfer(&PointCloud::new(a), &PointCloud::new(b), false).unwrap();
        assert_abs_diff_eq!(d, 0.075, epsilon = 0.05);
    }
}
