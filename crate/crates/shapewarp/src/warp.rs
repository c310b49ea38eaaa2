//! Warp spaces: low-dimensional deformation models of an object category.
//!
//! One training object is chosen as the canonical instance. Its surface is
//! represented by a dense point set (mesh vertices followed by evenly spread
//! surface samples), which is non-rigidly registered onto a sampled cloud of
//! every other training object. Each registration yields a displacement field
//! over the canonical points; PCA over these fields (the canonical object
//! itself contributes the zero field) gives an orthonormal basis in which a
//! category instance is just a low-dimensional latent vector.
//!
//! Because every decoded instance shares the canonical point ordering, a
//! point index refers to "the same place on the object" across all shapes in
//! the space — the property grasp and placement transfer rely on.

use nalgebra::{DMatrix, Point3, Vector3};

use crate::cloud::PointCloud;
use crate::cpd::{cpd_register, CpdConfig, CpdError};
use crate::geometry::{farthest_point_sampling, one_sided_chamfer, sample_surface_even, GeometryError};
use crate::mesh::TriMesh;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WarpError {
    #[error("warp-space learning needs at least 2 objects, got {0}")]
    TooFewObjects(usize),
    #[error("latent dimension {requested} exceeds {max} (one less than the object count)")]
    LatentDimTooLarge { requested: usize, max: usize },
    #[error("latent vector has dimension {got}, expected {expected}")]
    LatentDimMismatch { got: usize, expected: usize },
    #[error("canonical index {index} out of range for {objects} objects")]
    CanonicalIndexOutOfRange { index: usize, objects: usize },
    #[error(transparent)]
    Cpd(#[from] CpdError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// How the canonical object is picked during learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMethod {
    /// Exhaustive for small training sets (≤ 12 objects), approximate above.
    Auto,
    /// Register every candidate onto every other object and compare fits.
    Exhaustive,
    /// Compare raw (unregistered) cloud distances only.
    Approximate,
    /// Use the given training index directly.
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct WarpConfig {
    /// Latent dimension; `None` picks `min(K − 1, 8)` for `K` objects.
    pub latent_dim: Option<usize>,
    /// Number of even surface samples appended to the canonical vertices.
    pub canonical_samples: usize,
    /// Number of even surface samples drawn from each training object.
    pub training_samples: usize,
    /// Cap on cloud size during exhaustive canonical selection; keeps the
    /// all-pairs registration pass affordable.
    pub selection_samples: usize,
    pub selection: SelectionMethod,
    pub cpd: CpdConfig,
    pub seed: u64,
}

impl Default for WarpConfig {
    fn default() -> Self {
        WarpConfig {
            latent_dim: None,
            canonical_samples: 10_000,
            training_samples: 2_000,
            selection_samples: 500,
            selection: SelectionMethod::Auto,
            cpd: CpdConfig::default(),
            seed: 0,
        }
    }
}

/// Threshold below which [`SelectionMethod::Auto`] runs the exhaustive pass.
const AUTO_EXHAUSTIVE_LIMIT: usize = 12;

/// A latent shape: coefficients over the warp-space basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeParams {
    pub latent: Vec<f64>,
}

impl ShapeParams {
    pub fn zeros(d: usize) -> ShapeParams {
        ShapeParams { latent: vec![0.0; d] }
    }
}

/// A learned deformation space over one object category.
#[derive(Debug, Clone)]
pub struct WarpSpace {
    /// Index of the canonical object within the training set.
    pub canonical_index: usize,
    /// The canonical mesh; its faces are reused for every decoded shape.
    pub canonical_mesh: TriMesh,
    /// Canonical points: the mesh vertices followed by even surface samples.
    pub canonical_points: PointCloud,
    /// How many leading canonical points are mesh vertices.
    pub vertex_count: usize,
    /// Mean displacement field, flattened `[x0, y0, z0, x1, …]`.
    pub mean: Vec<f64>,
    /// Orthonormal principal displacement fields, strongest first.
    pub basis: Vec<Vec<f64>>,
    /// All singular values of the centered field matrix, strongest first.
    /// The first `latent_dim()` of them pair with `basis`; the full list
    /// makes explained-variance ratios computable.
    pub singular_values: Vec<f64>,
    /// Latent coordinates of each training object in this space.
    pub training_latents: Vec<Vec<f64>>,
}

impl WarpSpace {
    pub fn latent_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn point_count(&self) -> usize {
        self.canonical_points.len()
    }

    /// Fraction of training-field variance captured by each retained basis
    /// field.
    pub fn explained_variance_ratios(&self) -> Vec<f64> {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        self.singular_values[..self.latent_dim()]
            .iter()
            .map(|s| if total > 0.0 { s * s / total } else { 0.0 })
            .collect()
    }

    fn check_dim(&self, params: &ShapeParams) -> Result<(), WarpError> {
        if params.latent.len() != self.latent_dim() {
            return Err(WarpError::LatentDimMismatch {
                got: params.latent.len(),
                expected: self.latent_dim(),
            });
        }
        Ok(())
    }

    /// Displacement of canonical point `i` under the given latent vector.
    #[inline]
    pub(crate) fn point_displacement(&self, params: &ShapeParams, i: usize) -> Vector3<f64> {
        let o = 3 * i;
        let mut d = Vector3::new(self.mean[o], self.mean[o + 1], self.mean[o + 2]);
        for (l, field) in self.basis.iter().enumerate() {
            let v = params.latent[l];
            d.x += v * field[o];
            d.y += v * field[o + 1];
            d.z += v * field[o + 2];
        }
        d
    }

    /// Decodes a latent vector into a full point cloud in canonical pose.
    pub fn decode(&self, params: &ShapeParams) -> Result<PointCloud, WarpError> {
        self.check_dim(params)?;
        let pts = (0..self.point_count())
            .map(|i| self.canonical_points[i] + self.point_displacement(params, i))
            .collect();
        Ok(PointCloud::new(pts))
    }

    /// Decodes a latent vector into a mesh: the displaced canonical vertices
    /// with the canonical face list.
    pub fn reconstruct_mesh(&self, params: &ShapeParams) -> Result<TriMesh, WarpError> {
        self.check_dim(params)?;
        let vertices: Vec<Point3<f64>> = (0..self.vertex_count)
            .map(|i| self.canonical_points[i] + self.point_displacement(params, i))
            .collect();
        Ok(TriMesh::new(vertices, self.canonical_mesh.faces().to_vec())
            .expect("canonical faces stay valid for any vertex positions"))
    }
}

/// Sum over all other clouds of the squared one-sided Chamfer distance after
/// registering candidate `k` onto each of them; the index minimizing the sum
/// wins, ties to the lowest index.
pub fn select_canonical_exhaustive(
    clouds: &[PointCloud],
    cpd: &CpdConfig,
) -> Result<usize, WarpError> {
    if clouds.len() < 2 {
        return Err(WarpError::TooFewObjects(clouds.len()));
    }
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..clouds.len() {
        let mut total = 0.0;
        for (j, target) in clouds.iter().enumerate() {
            if j == k {
                continue;
            }
            let reg = cpd_register(&clouds[k], target, cpd)?;
            total += one_sided_chamfer(&reg.warped, target, true)?;
        }
        if total < best.0 {
            best = (total, k);
        }
    }
    Ok(best.1)
}

/// Like [`select_canonical_exhaustive`] but without registration: compares
/// raw squared Chamfer distances between the clouds as given.
pub fn select_canonical_approximate(clouds: &[PointCloud]) -> Result<usize, WarpError> {
    if clouds.len() < 2 {
        return Err(WarpError::TooFewObjects(clouds.len()));
    }
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..clouds.len() {
        let mut total = 0.0;
        for (j, target) in clouds.iter().enumerate() {
            if j == k {
                continue;
            }
            total += one_sided_chamfer(&clouds[k], target, true)?;
        }
        if total < best.0 {
            best = (total, k);
        }
    }
    Ok(best.1)
}

/// Random-stream layout within the learning seed: stream 0 samples the
/// canonical surface, streams `1 + k` sample training object `k`, and streams
/// `1 + K + k` thin clouds for canonical selection.
fn training_stream(k: usize) -> u64 {
    1 + k as u64
}

fn selection_stream(object_count: usize, k: usize) -> u64 {
    1 + object_count as u64 + k as u64
}

/// Learns a warp space from the meshes of one object category.
pub fn learn_warp_space(meshes: &[TriMesh], config: &WarpConfig) -> Result<WarpSpace, WarpError> {
    learn_warp_space_with_fields(meshes, config).map(|(space, _)| space)
}

/// Like [`learn_warp_space`] but also returns the raw training displacement
/// fields (one flattened `3n` vector per object; the canonical object's is
/// identically zero), so reconstruction error against the retained basis can
/// be measured directly.
pub fn learn_warp_space_with_fields(
    meshes: &[TriMesh],
    config: &WarpConfig,
) -> Result<(WarpSpace, Vec<Vec<f64>>), WarpError> {
    let k_objects = meshes.len();
    if k_objects < 2 {
        return Err(WarpError::TooFewObjects(k_objects));
    }
    let max_dim = k_objects - 1;
    let latent_dim = config.latent_dim.unwrap_or(max_dim.min(8));
    if latent_dim == 0 || latent_dim > max_dim {
        return Err(WarpError::LatentDimTooLarge { requested: latent_dim, max: max_dim });
    }

    // Per-object training clouds.
    let training: Vec<PointCloud> = meshes
        .iter()
        .enumerate()
        .map(|(k, mesh)| {
            sample_surface_even(mesh, config.training_samples, config.seed ^ training_stream(k))
        })
        .collect::<Result<_, _>>()?;

    let canonical_index = match config.selection {
        SelectionMethod::Fixed(index) => {
            if index >= k_objects {
                return Err(WarpError::CanonicalIndexOutOfRange { index, objects: k_objects });
            }
            index
        }
        method => {
            let thin: Vec<PointCloud> = training
                .iter()
                .enumerate()
                .map(|(k, cloud)| {
                    if cloud.len() <= config.selection_samples {
                        Ok(cloud.clone())
                    } else {
                        farthest_point_sampling(
                            cloud,
                            config.selection_samples,
                            config.seed ^ selection_stream(k_objects, k),
                        )
                        .map(|idx| cloud.select(&idx))
                    }
                })
                .collect::<Result<_, GeometryError>>()?;
            let exhaustive = match method {
                SelectionMethod::Exhaustive => true,
                SelectionMethod::Approximate => false,
                _ => k_objects <= AUTO_EXHAUSTIVE_LIMIT,
            };
            if exhaustive {
                select_canonical_exhaustive(&thin, &config.cpd)?
            } else {
                select_canonical_approximate(&thin)?
            }
        }
    };

    // Canonical point set: vertices first, then an even resampling.
    let canonical_mesh = meshes[canonical_index].clone();
    let mut canonical_pts: Vec<Point3<f64>> = canonical_mesh.vertices().to_vec();
    let vertex_count = canonical_pts.len();
    canonical_pts.extend(
        sample_surface_even(&canonical_mesh, config.canonical_samples, config.seed)?.into_points(),
    );
    let canonical_points = PointCloud::new(canonical_pts);
    let n = canonical_points.len();

    // One displacement field per training object; the canonical object maps
    // to itself with the zero field.
    let mut fields: Vec<Vec<f64>> = Vec::with_capacity(k_objects);
    for (k, cloud) in training.iter().enumerate() {
        if k == canonical_index {
            fields.push(vec![0.0; 3 * n]);
            continue;
        }
        let reg = cpd_register(&canonical_points, cloud, &config.cpd)?;
        let mut f = Vec::with_capacity(3 * n);
        for d in &reg.displacements {
            f.extend_from_slice(&[d.x, d.y, d.z]);
        }
        fields.push(f);
    }

    // Centered PCA via a thin SVD of the (3n × K) matrix of centered fields.
    let mut mean = vec![0.0; 3 * n];
    for f in &fields {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= k_objects as f64;
    }
    let centered = DMatrix::from_fn(3 * n, k_objects, |r, c| fields[c][r] - mean[r]);
    let svd = centered.svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors were requested");

    let mut basis = Vec::with_capacity(latent_dim);
    for l in 0..latent_dim {
        basis.push(u.column(l).iter().copied().collect::<Vec<f64>>());
    }
    let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();

    let training_latents = fields
        .iter()
        .map(|f| {
            basis
                .iter()
                .map(|b| {
                    b.iter()
                        .zip(f.iter().zip(&mean))
                        .map(|(bv, (fv, mv))| bv * (fv - mv))
                        .sum()
                })
                .collect()
        })
        .collect();

    let space = WarpSpace {
        canonical_index,
        canonical_mesh,
        canonical_points,
        vertex_count,
        mean,
        basis,
        singular_values,
        training_latents,
    };
    Ok((space, fields))
}
