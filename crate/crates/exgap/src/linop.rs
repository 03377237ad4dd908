//! Dense and block linear operators with adjoints and norm estimation.
//!
//! The constraint operator `A` is either one dense matrix or a horizontal
//! concatenation `[A_1 | ... | A_p]` of dense blocks matching the problem's
//! block structure. Operators are immutable after construction and safe to
//! share across threads.

use crate::error::{Error, Result};
use crate::vecmath;
use nalgebra::{DMatrix, SymmetricEigen};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries, length rows*cols.
    pub data: Vec<f64>,
}

impl DenseMat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        DenseMat { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMat::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Identity scaled by s (used for slack blocks like -I).
    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = DenseMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            out[r] = vecmath::dot(row, x);
        }
    }

    pub fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let yr = y[r];
            for (o, a) in out.iter_mut().zip(row) {
                *o += yr * a;
            }
        }
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// The constraint operator: dense, or a horizontal concatenation of blocks.
#[derive(Debug, Clone)]
pub enum LinearMap {
    Dense(DenseMat),
    /// [A_1 | A_2 | ... | A_p]; all blocks share the row count.
    HCat(Vec<DenseMat>),
}

impl LinearMap {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        LinearMap::Dense(DenseMat::new(rows, cols, data))
    }

    pub fn hcat(blocks: Vec<DenseMat>) -> Self {
        assert!(!blocks.is_empty());
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "block row mismatch");
        LinearMap::HCat(blocks)
    }

    pub fn rows(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.rows,
            LinearMap::HCat(bs) => bs[0].rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.cols,
            LinearMap::HCat(bs) => bs.iter().map(|b| b.cols).sum(),
        }
    }

    pub fn blocks(&self) -> Vec<&DenseMat> {
        match self {
            LinearMap::Dense(m) => vec![m],
            LinearMap::HCat(bs) => bs.iter().collect(),
        }
    }

    /// Column offsets of each block, length = #blocks + 1.
    pub fn col_offsets(&self) -> Vec<usize> {
        let mut offs = vec![0];
        for b in self.blocks() {
            offs.push(offs.last().unwrap() + b.cols);
        }
        offs
    }

    /// Materialize as one dense matrix (block columns left to right).
    pub fn to_dense(&self) -> DenseMat {
        match self {
            LinearMap::Dense(m) => m.clone(),
            LinearMap::HCat(bs) => {
                let rows = bs[0].rows;
                let cols: usize = bs.iter().map(|b| b.cols).sum();
                let mut out = DenseMat::zeros(rows, cols);
                let mut off = 0;
                for b in bs {
                    for r in 0..rows {
                        for c in 0..b.cols {
                            out.data[r * cols + off + c] = b.at(r, c);
                        }
                    }
                    off += b.cols;
                }
                out
            }
        }
    }
}

/// y = A x. Block concatenation accumulates left to right.
pub fn apply(op: &LinearMap, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != op.cols() {
        return Err(Error::Shape {
            expected: op.cols(),
            got: x.len(),
        });
    }
    let mut out = vec![0.0; op.rows()];
    match op {
        LinearMap::Dense(m) => m.apply(x, &mut out),
        LinearMap::HCat(bs) => {
            // accumulate scalar products in dense row order (block columns
            // left to right), so the result is bit-identical to applying the
            // materialized dense matrix
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                let mut off = 0;
                for b in bs {
                    let row = &b.data[r * b.cols..(r + 1) * b.cols];
                    for (a, xv) in row.iter().zip(&x[off..off + b.cols]) {
                        acc += a * xv;
                    }
                    off += b.cols;
                }
                *o = acc;
            }
        }
    }
    Ok(out)
}

/// x = A^T y.
pub fn adjoint_apply(op: &LinearMap, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != op.rows() {
        return Err(Error::Shape {
            expected: op.rows(),
            got: y.len(),
        });
    }
    let mut out = vec![0.0; op.cols()];
    match op {
        LinearMap::Dense(m) => m.apply_transpose(y, &mut out),
        LinearMap::HCat(bs) => {
            let mut off = 0;
            for b in bs {
                b.apply_transpose(y, &mut out[off..off + b.cols]);
                off += b.cols;
            }
        }
    }
    Ok(out)
}

/// Safety factor applied to the power-method estimate so the returned value
/// never under-reports ||A||_2^2 (the step-size conditions need an upper
/// bound on the true norm).
pub const NORM_SAFETY: f64 = 1.01;

/// Power-method estimate of lambda_max(A^T A), multiplied by [`NORM_SAFETY`].
///
/// The start vector is the normalized all-ones vector; if that lies in the
/// null space, deterministic basis-vector restarts are tried. Returns 0 for
/// the zero operator.
pub fn spectral_norm_sq(op: &LinearMap, tol: f64, max_iter: usize) -> Result<f64> {
    let n = op.cols();
    let starts = std::iter::once(vec![1.0; n]).chain((0..n).map(|i| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    }));
    for start in starts {
        match power_iterate(op, &start, tol, max_iter)? {
            PowerOutcome::Converged(lam) => return Ok(lam * NORM_SAFETY),
            PowerOutcome::NullStart => continue,
            PowerOutcome::NoConvergence(last) => {
                return Err(Error::NormEstimate {
                    iters: max_iter,
                    last: last * NORM_SAFETY,
                })
            }
        }
    }
    // every start vector (a full basis) maps to zero: zero operator
    Ok(0.0)
}

enum PowerOutcome {
    Converged(f64),
    NullStart,
    NoConvergence(f64),
}

fn power_iterate(op: &LinearMap, start: &[f64], tol: f64, max_iter: usize) -> Result<PowerOutcome> {
    let nrm = vecmath::norm2(start);
    let mut v = vecmath::scale(1.0 / nrm, start);
    let mut lam_prev = f64::NAN;
    let mut lam = 0.0;
    for _ in 0..max_iter {
        let w = apply(op, &v)?;
        lam = vecmath::norm2_sq(&w); // v normalized: v'A'Av = ||Av||^2
        if lam == 0.0 {
            return Ok(PowerOutcome::NullStart);
        }
        let u = adjoint_apply(op, &w)?;
        let unrm = vecmath::norm2(&u);
        if unrm == 0.0 {
            return Ok(PowerOutcome::NullStart);
        }
        v = vecmath::scale(1.0 / unrm, &u);
        if lam_prev.is_finite() && (lam - lam_prev).abs() <= tol * lam.max(1e-300) {
            return Ok(PowerOutcome::Converged(lam));
        }
        lam_prev = lam;
    }
    Ok(PowerOutcome::NoConvergence(lam))
}

/// Size cap for dense eigensolves.
pub const EIG_CAP: usize = 2000;

/// Smallest eigenvalue of A^T A via dense symmetric eigensolve.
pub fn min_eig_gram(op: &LinearMap) -> Result<f64> {
    let n = op.cols();
    if n > EIG_CAP {
        return Err(Error::TooLarge { dim: n, cap: EIG_CAP });
    }
    let a = op.to_dense().to_nalgebra();
    let gram = a.transpose() * &a;
    let eig = SymmetricEigen::new(gram);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(min.max(0.0))
}
