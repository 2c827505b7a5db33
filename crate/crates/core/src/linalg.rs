//! Small dense linear-algebra layer.
//!
//! [`Matrix`] is a plain row-major container used throughout the crate; the
//! heavy lifting (symmetric eigendecomposition, SVD, LU) is delegated to
//! `faer`.

use std::ops::{Index, IndexMut};

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{config, numeric, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major storage.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return config(format!("expected {} entries for a {rows}x{cols} matrix, got {}", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return config(format!("row {i} has length {} but row 0 has {cols}", r.len()));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    /// A single column as a matrix.
    pub fn column_vector(v: &[f64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // `chunks(0)` panics, so empty-column matrices yield empty rows explicitly.
        let cols = self.cols;
        (0..self.rows).map(move |i| &self.data[i * cols..(i + 1) * cols])
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.rows {
            return config(format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        self.rows().map(|r| dot(r, v)).collect()
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, data }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub(crate) fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, vectors as columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Full symmetric eigendecomposition.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    if a.nrows() != a.ncols() {
        return config("symmetric eigendecomposition needs a square matrix");
    }
    let evd = a
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| crate::Error::Numeric(format!("symmetric eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    let vectors = Matrix::from_faer(evd.U());
    Ok(SymEigen { values, vectors })
}

/// Options for [`sym_eigen_top`].
#[derive(Clone, Copy, Debug)]
pub struct SubspaceOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Extra basis vectors beyond the requested count, to speed convergence.
    pub oversample: usize,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 5000, oversample: 10 }
    }
}

/// The `k` algebraically largest eigenpairs of a symmetric matrix whose
/// spectrum lies in `[-1, 1]` (e.g. a conjugated Markov matrix), by
/// subspace iteration on `(A + I) / 2` with Rayleigh–Ritz projection.
///
/// Eigenvalues are returned descending.
pub fn sym_eigen_top(a: &Matrix, k: usize, opts: SubspaceOptions) -> Result<SymEigen> {
    let n = a.nrows();
    if n != a.ncols() || k == 0 || k > n {
        return config(format!("cannot extract {k} eigenpairs from a {}x{} matrix", a.nrows(), a.ncols()));
    }
    let p = (k + opts.oversample).min(n);
    let shifted = {
        let mut m = a.to_faer();
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        m * faer::Scale(0.5)
    };
    // Deterministic, well-spread start basis.
    let mut q = Mat::<f64>::from_fn(n, p, |i, j| (((i + 1) * (j + 7)) as f64 * 0.618_033_988_749_895).fract() - 0.5);
    let mut prev = vec![f64::INFINITY; k];
    let mut residual = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let z = &shifted * &q;
        q = z.qr().compute_thin_Q();
        let h = q.transpose() * &shifted * &q;
        let h = Mat::from_fn(p, p, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| crate::Error::Numeric(format!("Rayleigh–Ritz step failed: {e:?}")))?;
        let s = evd.S().column_vector();
        // faer sorts ascending; reverse to get the top pairs first.
        let order: Vec<usize> = (0..p).rev().collect();
        let vals: Vec<f64> = order.iter().map(|&i| s[i]).collect();
        let u = evd.U();
        let ritz = Mat::from_fn(p, p, |i, j| u[(i, order[j])]);
        q = &q * &ritz;
        residual = vals.iter().zip(&prev).take(k).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prev = vals[..k].to_vec();
        if residual < opts.tol && iter > 2 {
            let values = prev.iter().map(|v| 2.0 * v - 1.0).collect();
            let vectors = Matrix::from_fn(n, k, |i, j| q[(i, j)]);
            return Ok(SymEigen { values, vectors });
        }
    }
    numeric(format!(
        "subspace iteration did not converge: {} iterations, last eigenvalue change {residual:.3e} (tol {:.1e}), n = {n}, k = {k}",
        opts.max_iter, opts.tol
    ))
}

/// Singular value decomposition `A = U diag(s) Vᵀ`, singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

pub fn svd(a: &Matrix) -> Result<Svd> {
    let dec = a.to_faer().thin_svd().map_err(|e| crate::Error::Numeric(format!("SVD failed: {e:?}")))?;
    let s = dec.S().column_vector();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let (u, v) = (dec.U(), dec.V());
    Ok(Svd {
        u: Matrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]),
        singular_values: order.iter().map(|&i| s[i]).collect(),
        v: Matrix::from_fn(v.nrows(), order.len(), |i, j| v[(i, order[j])]),
    })
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return config("solve: dimension mismatch");
    }
    let lu = a.to_faer().partial_piv_lu();
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    let out: Vec<f64> = (0..b.len()).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return numeric("solve: singular matrix");
    }
    Ok(out)
}
