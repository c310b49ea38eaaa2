//! Minimal dense linear algebra for the registration solver.
//!
//! The M-step of coherent point drift solves an n×n symmetric
//! positive-definite system whose size (a few thousand) makes a general
//! factorization library overkill but a naive triple loop far too slow. This
//! module provides a cache-blocked Cholesky and the few helpers around it.
//!
//! Determinism matters as much as speed here: every reduction accumulates in
//! a fixed order, and the parallel sections assign each output element to
//! exactly one task, so results are identical for any worker-thread count.

use rayon::prelude::*;

/// Panel width for the blocked factorization; sized so a pair of row panels
/// stays in L1/L2 during the trailing update.
const BLOCK: usize = 128;

/// Dense row-major square-or-rectangular matrix of `f64`.
#[derive(Debug, Clone)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline(always)]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline(always)]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dot product with fixed-order accumulation: 32 interleaved partial sums
/// (wide enough to hide FMA latency at full vector width) folded in a fixed
/// sequence, so it evaluates identically everywhere it is used.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    const W: usize = 32;
    let mut acc = [0.0f64; W];
    let chunks = a.len() / W;
    for k in 0..chunks {
        let i = W * k;
        for c in 0..W {
            acc[c] += a[i + c] * b[i + c];
        }
    }
    // Pairwise tree fold — still a fixed order, but vector-friendly instead
    // of a serial chain of 32 adds.
    let mut width = W / 2;
    while width >= 1 {
        for c in 0..width {
            acc[c] += acc[c + width];
        }
        width /= 2;
    }
    let mut s = acc[0];
    for i in W * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Two dot products sharing the left operand's loads; the factorization's
/// trailing update is load-bound, so fusing pairs buys real throughput.
#[inline]
fn dot2(a: &[f64], b0: &[f64], b1: &[f64]) -> [f64; 2] {
    const W: usize = 16;
    let mut acc0 = [0.0f64; W];
    let mut acc1 = [0.0f64; W];
    let chunks = a.len() / W;
    for k in 0..chunks {
        let i = W * k;
        for c in 0..W {
            let av = a[i + c];
            acc0[c] += av * b0[i + c];
            acc1[c] += av * b1[i + c];
        }
    }
    let mut width = W / 2;
    while width >= 1 {
        for c in 0..width {
            acc0[c] += acc0[c + width];
            acc1[c] += acc1[c + width];
        }
        width /= 2;
    }
    let (mut s0, mut s1) = (acc0[0], acc1[0]);
    for i in W * chunks..a.len() {
        s0 += a[i] * b0[i];
        s1 += a[i] * b1[i];
    }
    [s0, s1]
}

/// Compensated (Kahan) accumulator for long sums whose tolerance checks are
/// tighter than naive f64 accumulation error.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// In-place Cholesky factorization of a symmetric positive-definite matrix
/// (only the lower triangle is read and written): `A = L·Lᵀ`.
///
/// Blocked right-looking variant; the trailing update is parallelized over
/// row blocks with each entry reduced serially, keeping results bitwise
/// stable across thread counts. Returns the first column index with a
/// non-positive pivot if the matrix is not positive definite.
pub(crate) fn cholesky_in_place(a: &mut Mat) -> Result<(), usize> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;

    let mut kb = 0;
    while kb < n {
        let b = BLOCK.min(n - kb);
        let r0 = kb + b;

        // Factor the diagonal block.
        for j in kb..kb + b {
            let raw = a.at(j, j) - dot(&a.row(j)[kb..j], &a.row(j)[kb..j]);
            if raw <= 0.0 || !raw.is_finite() {
                return Err(j);
            }
            let pivot = raw.sqrt();
            *a.at_mut(j, j) = pivot;
            let inv = 1.0 / pivot;
            for i in j + 1..kb + b {
                let s = dot(&a.row(i)[kb..j], &a.row(j)[kb..j]);
                *a.at_mut(i, j) = (a.at(i, j) - s) * inv;
            }
        }

        if r0 >= n {
            break;
        }

        // Panel solve: rows below the diagonal block against its transpose.
        {
            let cols = a.cols;
            let (head, tail) = a.data.split_at_mut(r0 * cols);
            let diag = &head[kb * cols..]; // rows kb..r0
            tail.par_chunks_mut(cols * BLOCK).for_each(|chunk| {
                for row in chunk.chunks_mut(cols) {
                    for j in kb..kb + b {
                        let drow = &diag[(j - kb) * cols..(j - kb) * cols + cols];
                        let s = dot(&row[kb..j], &drow[kb..j]);
                        row[j] = (row[j] - s) / drow[j];
                    }
                }
            });
        }

        // Copy the freshly solved panel once; the trailing update then only
        // reads this buffer, which keeps borrows disjoint and rows hot.
        let trailing = n - r0;
        let mut panel = vec![0.0; trailing * b];
        for i in 0..trailing {
            panel[i * b..(i + 1) * b].copy_from_slice(&a.row(r0 + i)[kb..kb + b]);
        }

        // Trailing update: A22 -= P·Pᵀ (lower triangle only). Outputs are
        // visited in 8×8 tiles so both panel rows of a tile stay in L1; each
        // element is still exactly one fixed-order dot product.
        {
            const TILE: usize = 8;
            let cols = a.cols;
            let tail = &mut a.data[r0 * cols..];
            let panel = &panel;
            tail.par_chunks_mut(cols * BLOCK)
                .enumerate()
                .for_each(|(chunk_idx, chunk)| {
                    let base = chunk_idx * BLOCK; // first trailing row index
                    let rows = chunk.len() / cols;
                    let mut i0 = 0;
                    while i0 < rows {
                        let i_hi = (i0 + TILE).min(rows);
                        let mut j0 = 0;
                        while j0 <= base + i_hi - 1 {
                            for li in i0..i_hi {
                                let i = base + li;
                                if j0 > i {
                                    continue;
                                }
                                let pi = &panel[i * b..(i + 1) * b];
                                let row = &mut chunk[li * cols..(li + 1) * cols];
                                let j_hi = (j0 + TILE).min(i + 1);
                                let mut j = j0;
                                while j + 1 < j_hi {
                                    let pj0 = &panel[j * b..(j + 1) * b];
                                    let pj1 = &panel[(j + 1) * b..(j + 2) * b];
                                    let [d0, d1] = dot2(pi, pj0, pj1);
                                    row[r0 + j] -= d0;
                                    row[r0 + j + 1] -= d1;
                                    j += 2;
                                }
                                if j < j_hi {
                                    let pj = &panel[j * b..(j + 1) * b];
                                    row[r0 + j] -= dot(pi, pj);
                                }
                            }
                            j0 += TILE;
                        }
                        i0 += TILE;
                    }
                });
        }

        kb += b;
    }
    Ok(())
}

/// Solves `L·Lᵀ·x = rhs` for several right-hand sides given the Cholesky
/// factor in the lower triangle of `l`. Each right-hand side is a column
/// stored as its own contiguous vector; solved in place.
pub(crate) fn cholesky_solve(l: &Mat, rhs: &mut [Vec<f64>]) {
    let n = l.rows;
    for col in rhs.iter_mut() {
        debug_assert_eq!(col.len(), n);
        // Forward: L y = b
        for i in 0..n {
            let s = dot(&l.row(i)[..i], &col[..i]);
            col[i] = (col[i] - s) / l.at(i, i);
        }
        // Backward: Lᵀ x = y. Row-major lower triangle means column access;
        // accumulate by updating the remainder instead.
        for i in (0..n).rev() {
            let xi = col[i] / l.at(i, i);
            col[i] = xi;
            let row_i = l.row(i);
            for j in 0..i {
                col[j] -= row_i[j] * xi;
            }
        }
    }
}

/// `out[c] = m · v[c]` for each of the three stacked column vectors. This is
/// quadratic, not cubic, so a plain loop over contiguous rows suffices.
pub(crate) fn matvec_columns(m: &Mat, v: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    let rows = m.rows;
    let mut out = [vec![0.0; rows], vec![0.0; rows], vec![0.0; rows]];
    for i in 0..rows {
        let row = m.row(i);
        for c in 0..3 {
            out[c][i] = dot(row, &v[c]);
        }
    }
    out
}
