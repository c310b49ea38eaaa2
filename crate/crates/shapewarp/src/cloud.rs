//! Ordered 3-D point clouds.
//!
//! Point order is significant throughout the crate: clouds produced by
//! decoding a warp model keep canonical point order, and interaction transfer
//! relies on indexing into them.

use nalgebra::{Point3, Vector3};

use crate::transform::RigidTransform;

/// An ordered list of 3-D points with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        Self { points }
    }

    pub fn from_coords(coords: &[[f64; 3]]) -> Self {
        Self::new(coords.iter().map(|c| Point3::new(c[0], c[1], c[2])).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point3<f64>> {
        self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point3<f64>> {
        self.points.iter()
    }

    /// True when every coordinate of every point is finite.
    pub fn all_finite(&self) -> bool {
        self.points.iter().all(|p| p.coords.iter().all(|c| c.is_finite()))
    }

    /// Arithmetic mean of the points. Zero for an empty cloud.
    pub fn centroid(&self) -> Vector3<f64> {
        if self.points.is_empty() {
            return Vector3::zeros();
        }
        let sum = self
            .points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords);
        sum / self.points.len() as f64
    }

    /// Axis-aligned bounding box as `(min, max)`. `None` for an empty cloud.
    pub fn bounding_box(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = *self.points.first()?;
        let mut min = first;
        let mut max = first;
        for p in &self.points[1..] {
            for i in 0..3 {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        Some((min, max))
    }

    /// Length of the bounding-box diagonal. Zero for empty or single-point clouds.
    pub fn bbox_diagonal(&self) -> f64 {
        match self.bounding_box() {
            Some((min, max)) => (max - min).norm(),
            None => 0.0,
        }
    }

    pub fn translated(&self, offset: &Vector3<f64>) -> PointCloud {
        PointCloud::new(self.points.iter().map(|p| p + offset).collect())
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointCloud {
        PointCloud::new(self.points.iter().map(|p| t.apply(p)).collect())
    }

    /// The sub-cloud at `indices`, in the order given.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud::new(indices.iter().map(|&i| self.points[i]).collect())
    }
}

impl std::ops::Index<usize> for PointCloud {
    type Output = Point3<f64>;

    fn index(&self, i: usize) -> &Point3<f64> {
        &self.points[i]
    }
}

impl FromIterator<Point3<f64>> for PointCloud {
    fn from_iter<T: IntoIterator<Item = Point3<f64>>>(iter: T) -> Self {
        PointCloud::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Point3<f64>;
    type IntoIter = std::slice::Iter<'a, Point3<f64>>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn centroid_and_bbox() {
        let c = PointCloud::from_coords(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 3.0, 0.0]]);
        assert_abs_diff_eq!(c.centroid(), Vector3::new(1.0, 1.0, 0.0), epsilon = 1e-15);
        let (min, max) = c.bounding_box().unwrap();
        assert_eq!(min, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(max, Point3::new(2.0, 3.0, 0.0));
        assert_abs_diff_eq!(c.bbox_diagonal(), (4.0f64 + 9.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn empty_cloud_is_harmless() {
        let c = PointCloud::new(vec![]);
        assert!(c.is_empty());
        assert_eq!(c.centroid(), Vector3::zeros());
        assert!(c.bounding_box().is_none());
        assert_eq!(c.bbox_diagonal(), 0.0);
    }

    #[test]
    fn finiteness_check_flags_nan() {
        let mut pts = vec![Point3::new(0.0, 0.0, 0.0)];
        assert!(PointCloud::new(pts.clone()).all_finite());
        pts.push(Point3::new(f64::NAN, 0.0, 0.0));
        assert!(!PointCloud::new(pts).all_finite());
    }
}
