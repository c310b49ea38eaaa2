//! Coherent point drift: non-rigid point-set registration.
//!
//! The source cloud is treated as the centroids of a Gaussian mixture fitted
//! to the target cloud by expectation–maximization, while a motion-coherence
//! penalty couples nearby centroids so the recovered displacement field stays
//! smooth. Displacements live in the span of a Gaussian kernel over the
//! source points: `z = y + G·W`, and each M-step solves the regularized
//! normal equations `(G + α σ² diag(1/P1)) W = diag(1/P1) Pᵀ X − Y` followed
//! by a closed-form variance update.
//!
//! Both clouds are normalized internally (own centroid, own bounding-box
//! diagonal), so `alpha` and `kernel_beta` are dimensionless and results are
//! equivariant under translation of either cloud. Warped positions are mapped
//! back through the target frame.

use nalgebra::{DMatrix, Point3, Vector3};
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::linalg::{self, KahanSum, Mat};

/// Parameters of the registration. The defaults assume normalized clouds
/// (unit bounding-box diagonal), which is what [`cpd_register`] feeds the EM
/// loop regardless of input units.
#[derive(Debug, Clone)]
pub struct CpdConfig {
    /// Weight of the motion-coherence penalty; larger values give stiffer,
    /// more rigid displacement fields.
    pub alpha: f64,
    /// Width of the Gaussian kernel coupling source-point displacements, in
    /// units of the normalized cloud.
    pub kernel_beta: f64,
    /// Prior probability `w ∈ [0, 1)` that a target point is an outlier drawn
    /// from a uniform component instead of the mixture.
    pub outlier_weight: f64,
    /// Upper bound on EM iterations.
    pub max_iters: usize,
    /// Convergence threshold on the relative change of the objective.
    pub tol: f64,
}

impl Default for CpdConfig {
    fn default() -> Self {
        CpdConfig {
            alpha: 2.0,
            kernel_beta: 2.0,
            outlier_weight: 0.0,
            max_iters: 100,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CpdError {
    #[error("point clouds must be non-empty")]
    EmptyCloud,
    #[error("input cloud contains non-finite coordinates")]
    NonFiniteInput,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("numerical collapse at EM iteration {iteration}")]
    NumericalCollapse { iteration: usize },
}

/// Outcome of a registration.
#[derive(Debug, Clone)]
pub struct CpdResult {
    /// Source points moved onto the target, in the original coordinate frame.
    pub warped: PointCloud,
    /// `warped[j] − source[j]` for each source point.
    pub displacements: Vec<Vector3<f64>>,
    /// Penalized negative log-likelihood after each EM iteration (evaluated
    /// in the normalized frame). Non-increasing up to roundoff.
    pub objective_history: Vec<f64>,
    /// Number of EM iterations actually performed.
    pub iterations: usize,
    /// Final mixture variance, mapped back to target-frame units.
    pub sigma2: f64,
}

/// Gram matrix of the Gaussian kernel: `G_ij = exp(−‖p_i − p_j‖² / (2β²))`.
pub fn gaussian_kernel(points: &[Point3<f64>], beta: f64) -> DMatrix<f64> {
    let n = points.len();
    let mut g = DMatrix::zeros(n, n);
    let inv = 1.0 / (2.0 * beta * beta);
    for i in 0..n {
        g[(i, i)] = 1.0;
        for j in 0..i {
            let v = (-crate::geometry::dist2(&points[i], &points[j]) * inv).exp();
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Floor on per-centroid responsibility mass; keeps `1/P1` finite for source
/// points the target currently explains nothing with.
const P1_FLOOR: f64 = 1e-150;

/// Floor on the mixture variance in normalized units; a perfect fit would
/// otherwise drive the log-likelihood to −∞ and never trigger the tolerance.
const SIGMA2_FLOOR: f64 = 1e-12;

/// Target rows are processed in fixed blocks of this many; partial sums merge
/// in block order, so results do not depend on the rayon thread count.
const ROW_BLOCK: usize = 256;

struct Normalized {
    points: Vec<Point3<f64>>,
    centroid: Vector3<f64>,
    scale: f64,
}

fn normalize(cloud: &PointCloud) -> Normalized {
    let c = cloud.centroid();
    let diag = cloud.bbox_diagonal();
    let scale = if diag > 0.0 { diag } else { 1.0 };
    let points = cloud
        .iter()
        .map(|p| Point3::from((p.coords - c) / scale))
        .collect();
    Normalized { points, centroid: c, scale }
}

struct EStep {
    /// `P1[j] = Σ_i P_ij` — responsibility mass per source point.
    p1: Vec<f64>,
    /// `PX[c][j] = Σ_i P_ij · x_i[c]`.
    px: [Vec<f64>; 3],
    /// `Pt1[i] = Σ_j P_ij`.
    pt1: Vec<f64>,
    /// Total responsibility mass `N_p = Σ_ij P_ij`.
    np: f64,
    /// Negative log-likelihood of the target under the current mixture.
    nll: f64,
}

/// One E-step pass: responsibilities of every (target, centroid) pair,
/// reduced to the sufficient statistics the M-step needs, together with the
/// exact (log-sum-exp) data log-likelihood at the current parameters.
fn e_step(targets: &[Point3<f64>], z: &[Point3<f64>], sigma2: f64, w: f64) -> EStep {
    let n = targets.len();
    let m = z.len();
    let inv2s = 1.0 / (2.0 * sigma2);
    // Posterior denominators carry c = (2πσ²)^{3/2} · w/(1−w) · M/N.
    let c = if w > 0.0 {
        (2.0 * std::f64::consts::PI * sigma2).powf(1.5) * w / (1.0 - w) * m as f64 / n as f64
    } else {
        0.0
    };
    // Constant part of ln p(x_i): mixture weight and Gaussian normalizer.
    let ln_gauss = ((1.0 - w) / m as f64).ln() - 1.5 * (2.0 * std::f64::consts::PI * sigma2).ln();
    let ln_outlier = if w > 0.0 { (w / n as f64).ln() } else { f64::NEG_INFINITY };

    struct Partial {
        p1: Vec<f64>,
        px: [Vec<f64>; 3],
        pt1: Vec<f64>,
        np: f64,
        nll: f64,
    }

    let partials: Vec<Partial> = targets
        .par_chunks(ROW_BLOCK)
        .enumerate()
        .map(|(_, rows)| {
            let mut p1 = vec![0.0; m];
            let mut px = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
            let mut pt1 = Vec::with_capacity(rows.len());
            let mut np = 0.0;
            let mut nll = KahanSum::default();
            let mut d2 = vec![0.0; m];
            for x in rows {
                let mut min_d2 = f64::INFINITY;
                for (j, zj) in z.iter().enumerate() {
                    let d = crate::geometry::dist2(x, zj);
                    d2[j] = d;
                    if d < min_d2 {
                        min_d2 = d;
                    }
                }
                let max_e = -min_d2 * inv2s;
                let mut s = 0.0;
                for dj in d2.iter_mut() {
                    *dj = (-(*dj - min_d2) * inv2s).exp();
                    s += *dj;
                }
                // Shifted outlier mass; may overflow to +inf when every
                // centroid is hopelessly far, which correctly zeroes the row.
                let outlier = if c > 0.0 { c * (-max_e).exp() } else { 0.0 };
                let r = 1.0 / (s + outlier);
                let row_mass = if r.is_finite() { s * r } else { 0.0 };
                pt1.push(row_mass);
                np += row_mass;
                if r.is_finite() && r > 0.0 {
                    for j in 0..m {
                        let p = d2[j] * r;
                        p1[j] += p;
                        px[0][j] += p * x.x;
                        px[1][j] += p * x.y;
                        px[2][j] += p * x.z;
                    }
                }
                // ln p(x) = logaddexp(ln_gauss + max_e + ln S, ln_outlier)
                let a = ln_gauss + max_e + s.ln();
                let lp = if ln_outlier == f64::NEG_INFINITY {
                    a
                } else {
                    let (hi, lo) = if a >= ln_outlier { (a, ln_outlier) } else { (ln_outlier, a) };
                    hi + (lo - hi).exp().ln_1p()
                };
                nll.add(-lp);
            }
            Partial { p1, px, pt1, np, nll: nll.value() }
        })
        .collect();

    let mut out = EStep {
        p1: vec![0.0; m],
        px: [vec![0.0; m], vec![0.0; m], vec![0.0; m]],
        pt1: Vec::with_capacity(n),
        np: 0.0,
        nll: 0.0,
    };
    let mut nll = KahanSum::default();
    for part in partials {
        for j in 0..m {
            out.p1[j] += part.p1[j];
        }
        for ch in 0..3 {
            for j in 0..m {
                out.px[ch][j] += part.px[ch][j];
            }
        }
        out.pt1.extend_from_slice(&part.pt1);
        out.np += part.np;
        nll.add(part.nll);
    }
    out.nll = nll.value();
    out
}

/// Registers `source` onto `target`, returning the warped source along with
/// the displacement field and the EM objective trace.
pub fn cpd_register(
    source: &PointCloud,
    target: &PointCloud,
    config: &CpdConfig,
) -> Result<CpdResult, CpdError> {
    if source.is_empty() || target.is_empty() {
        return Err(CpdError::EmptyCloud);
    }
    if !source.all_finite() || !target.all_finite() {
        return Err(CpdError::NonFiniteInput);
    }
    if !(config.alpha > 0.0 && config.alpha.is_finite()) {
        return Err(CpdError::InvalidConfig("alpha must be positive and finite"));
    }
    if !(config.kernel_beta > 0.0 && config.kernel_beta.is_finite()) {
        return Err(CpdError::InvalidConfig("kernel_beta must be positive and finite"));
    }
    if !(0.0..1.0).contains(&config.outlier_weight) {
        return Err(CpdError::InvalidConfig("outlier_weight must lie in [0, 1)"));
    }
    if config.max_iters == 0 {
        return Err(CpdError::InvalidConfig("max_iters must be at least 1"));
    }
    if !(config.tol >= 0.0 && config.tol.is_finite()) {
        return Err(CpdError::InvalidConfig("tol must be non-negative and finite"));
    }

    let src = normalize(source);
    let tgt = normalize(target);
    let m = src.points.len();
    let n = tgt.points.len();

    // Kernel over the normalized source; constant across iterations.
    let mut g = Mat::zeros(m, m);
    {
        let inv = 1.0 / (2.0 * config.kernel_beta * config.kernel_beta);
        for i in 0..m {
            *g.at_mut(i, i) = 1.0;
            for j in 0..i {
                let v = (-crate::geometry::dist2(&src.points[i], &src.points[j]) * inv).exp();
                *g.at_mut(i, j) = v;
                *g.at_mut(j, i) = v;
            }
        }
    }

    // σ²_init = mean squared distance over all pairs / 3, via moments.
    let mut sigma2 = {
        let (mut sy2, mut sx2) = (0.0, 0.0);
        let (mut sy, mut sx) = (Vector3::zeros(), Vector3::zeros());
        for p in &src.points {
            sy2 += p.coords.norm_squared();
            sy += p.coords;
        }
        for p in &tgt.points {
            sx2 += p.coords.norm_squared();
            sx += p.coords;
        }
        let total = n as f64 * sy2 + m as f64 * sx2 - 2.0 * sx.dot(&sy);
        (total / (3.0 * (m * n) as f64)).max(SIGMA2_FLOOR)
    };

    let mut w_coef: [Vec<f64>; 3] = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    let mut z = src.points.clone();
    let mut penalty = 0.0; // α/2 · tr(WᵀGW) at the current W
    let mut history = Vec::new();
    let mut a = Mat::zeros(m, m);

    for iter in 0..=config.max_iters {
        let stats = e_step(&tgt.points, &z, sigma2, config.outlier_weight);
        let objective = stats.nll + penalty;
        if !objective.is_finite() {
            return Err(CpdError::NumericalCollapse { iteration: iter });
        }
        history.push(objective);
        if iter > 0 {
            let prev = history[iter - 1];
            if (prev - objective).abs() <= config.tol * (1.0 + objective.abs()) {
                break;
            }
        }
        if iter == config.max_iters {
            break;
        }

        // M-step, displacement coefficients: (G + ασ²·diag(1/P1)) W = RHS.
        a.data.copy_from_slice(&g.data);
        for j in 0..m {
            *a.at_mut(j, j) += config.alpha * sigma2 / stats.p1[j].max(P1_FLOOR);
        }
        let mut rhs: Vec<Vec<f64>> = (0..3)
            .map(|ch| {
                (0..m)
                    .map(|j| {
                        stats.px[ch][j] / stats.p1[j].max(P1_FLOOR) - src.points[j].coords[ch]
                    })
                    .collect()
            })
            .collect();
        if linalg::cholesky_in_place(&mut a).is_err() {
            return Err(CpdError::NumericalCollapse { iteration: iter });
        }
        linalg::cholesky_solve(&a, &mut rhs);
        for ch in 0..3 {
            w_coef[ch].copy_from_slice(&rhs[ch]);
        }

        let disp = linalg::matvec_columns(&g, &w_coef);
        let mut pen = 0.0;
        for ch in 0..3 {
            pen += linalg::dot(&disp[ch], &w_coef[ch]);
        }
        penalty = 0.5 * config.alpha * pen;
        for j in 0..m {
            z[j] = Point3::new(
                src.points[j].x + disp[0][j],
                src.points[j].y + disp[1][j],
                src.points[j].z + disp[2][j],
            );
        }

        // Closed-form variance update at the new positions.
        let mut xx = 0.0;
        for (i, x) in tgt.points.iter().enumerate() {
            xx += stats.pt1[i] * x.coords.norm_squared();
        }
        let mut cross = 0.0;
        let mut zz = 0.0;
        for j in 0..m {
            cross += stats.px[0][j] * z[j].x + stats.px[1][j] * z[j].y + stats.px[2][j] * z[j].z;
            zz += stats.p1[j] * z[j].coords.norm_squared();
        }
        sigma2 = (xx - 2.0 * cross + zz) / (3.0 * stats.np);
        if !sigma2.is_finite() {
            return Err(CpdError::NumericalCollapse { iteration: iter });
        }
        if sigma2 < SIGMA2_FLOOR {
            sigma2 = SIGMA2_FLOOR;
        }
        if w_coef.iter().any(|col| col.iter().any(|v| !v.is_finite())) {
            return Err(CpdError::NumericalCollapse { iteration: iter });
        }
    }

    // Map the aligned points back through the target frame.
    let warped: Vec<Point3<f64>> = z
        .iter()
        .map(|p| Point3::from(p.coords * tgt.scale + tgt.centroid))
        .collect();
    let displacements: Vec<Vector3<f64>> = warped
        .iter()
        .zip(source.iter())
        .map(|(wp, sp)| wp - sp)
        .collect();

    Ok(CpdResult {
        warped: PointCloud::new(warped),
        displacements,
        iterations: history.len() - 1,
        objective_history: history,
        sigma2: sigma2 * tgt.scale * tgt.scale,
    })
}
