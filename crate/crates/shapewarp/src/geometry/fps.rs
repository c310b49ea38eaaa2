//! Farthest-point sampling.

use rand::Rng;

use super::{GeometryError, dist2};
use crate::cloud::PointCloud;
use crate::rng::rng_for_seed;

/// Greedily selects `m` indices spreading over the cloud: the first point is
/// drawn uniformly from the seeded generator, each later point maximizes the
/// distance to everything already selected (exact ties broken towards the
/// lower index). Returns the selected indices in selection order.
pub fn farthest_point_sampling(
    cloud: &PointCloud,
    m: usize,
    seed: u64,
) -> Result<Vec<usize>, GeometryError> {
    let n = cloud.len();
    if m > n {
        return Err(GeometryError::InsufficientPoints { requested: m, available: n });
    }
    if m == 0 {
        return Ok(Vec::new());
    }

    let first = rng_for_seed(seed).gen_range(0..n);
    let mut selected = Vec::with_capacity(m);
    selected.push(first);

    // Squared distance from each point to the selected set so far.
    let mut min_d2: Vec<f64> = cloud.iter().map(|p| dist2(p, &cloud[first])).collect();
    while selected.len() < m {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for (i, &d) in min_d2.iter().enumerate() {
            // Maximize distance; among equals prefer the lower index, which
            // the strict > on a forward scan gives us.
            if d > best.0 {
                best = (d, i);
            }
        }
        let chosen = best.1;
        selected.push(chosen);
        for (i, d) in min_d2.iter_mut().enumerate() {
            let nd = dist2(&cloud[i], &cloud[chosen]);
            if nd < *d {
                *d = nd;
            }
        }
    }
    Ok(selected)
}
