//! Local sensitivity: Jacobians, singular values, the deformation metric
//! `g = JᵀJ`, and active subspaces.

use serde::{Deserialize, Serialize};

use crate::error::{config, numeric, Result};
use crate::linalg::{svd, sym_eigen, Matrix};
use crate::models::Model;
use crate::parallel::par_map;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMethod {
    Analytic,
    FiniteDifference,
}

/// `N × M` matrix of `∂fₙ/∂pₘ` at `point`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianMatrix {
    pub matrix: Matrix,
    pub point: Vec<f64>,
    pub method: JacobianMethod,
}

/// Central-difference Jacobian of a vector map (relative step `1e-6`, floor `1e-9`).
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Result<Vec<f64>>, p: &[f64]) -> Result<Matrix> {
    let mut x = p.to_vec();
    let mut cols = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let h = (1e-6 * p[i].abs()).max(1e-9);
        x[i] = p[i] + h;
        let fp = f(&x)?;
        x[i] = p[i] - h;
        let fm = f(&x)?;
        x[i] = p[i];
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>());
    }
    let n = cols.first().map_or(0, Vec::len);
    Ok(Matrix::from_fn(n, p.len(), |r, c| cols[c][r]))
}

pub fn jacobian(model: &Model, p: &[f64], method: JacobianMethod) -> Result<JacobianMatrix> {
    if p.len() != model.input_dim() {
        return config(format!("Jacobian point has {} entries, model has {} inputs", p.len(), model.input_dim()));
    }
    let matrix = match method {
        JacobianMethod::FiniteDifference => fd_jacobian(|x| model.evaluate(x), p)?,
        JacobianMethod::Analytic => match model {
            Model::Toy(m) => m.jacobian(p[0], p[1])?,
            Model::Singpert(m) => m.jacobian(p[0], p[1])?,
            _ => return config(format!("no analytic Jacobian for model '{}'", model.id().as_str())),
        },
    };
    if matrix.as_slice().iter().any(|v| !v.is_finite()) {
        return numeric(format!("non-finite Jacobian entry at {p:?}"));
    }
    Ok(JacobianMatrix { matrix, point: p.to_vec(), method })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySummary {
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `g = JᵀJ`.
    pub metric: Matrix,
    /// `σᵢ/σ₁`.
    pub ratios: Vec<f64>,
    /// Number of ratios at or above the threshold.
    pub effective_rank: usize,
    pub threshold: f64,
}

/// Default `σᵢ/σ₁` below which a direction counts as sloppy.
pub const RANK_THRESHOLD: f64 = 1e-2;

pub fn sensitivity_summary(j: &JacobianMatrix, threshold: f64) -> Result<SensitivitySummary> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return config(format!("rank threshold must lie in (0, 1), got {threshold}"));
    }
    let mut singular_values = svd(&j.matrix)?.singular_values;
    singular_values.resize(j.matrix.ncols(), 0.0);
    let metric = j.matrix.transpose().matmul(&j.matrix)?;
    let s1 = singular_values.first().copied().unwrap_or(0.0);
    let ratios: Vec<f64> = singular_values.iter().map(|s| if s1 > 0.0 { s / s1 } else { 0.0 }).collect();
    let effective_rank = if s1 > 0.0 { ratios.iter().filter(|&&r| r >= threshold).count() } else { 0 };
    Ok(SensitivitySummary { singular_values, metric, ratios, effective_rank, threshold })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveSubspace {
    /// `Ĉ = (1/S) Σ ∇f ∇fᵀ`.
    pub c: Matrix,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns `w₁, w₂, …`.
    pub eigenvectors: Matrix,
    /// `ψ₁ = w₁ᵀx` per sample.
    pub psi1: Vec<f64>,
}

impl ActiveSubspace {
    pub fn direction(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }
}

pub fn active_subspace(
    samples: &Matrix,
    gradient: impl Fn(&[f64]) -> Result<Vec<f64>> + Sync,
) -> Result<ActiveSubspace> {
    let (s, m) = (samples.nrows(), samples.ncols());
    if s == 0 || m == 0 {
        return config("active subspaces need at least one sample");
    }
    let grads = par_map(s, |i| gradient(samples.row(i)));
    let mut c = Matrix::zeros(m, m);
    for g in grads {
        let g = g?;
        if g.len() != m || g.iter().any(|v| !v.is_finite()) {
            return numeric("gradient has the wrong length or non-finite entries");
        }
        for a in 0..m {
            for b in 0..m {
                c[(a, b)] += g[a] * g[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..m {
            c[(a, b)] /= s as f64;
        }
    }
    let eig = sym_eigen(&c)?;
    // Ascending → descending, with the largest-magnitude entry positive.
    let order: Vec<usize> = (0..m).rev().collect();
    let eigenvalues = order.iter().map(|&k| eig.values[k].max(0.0)).collect();
    let mut eigenvectors = Matrix::zeros(m, m);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.vectors.column(k);
        let big = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for r in 0..m {
            eigenvectors[(r, col)] = sign * v[r];
        }
    }
    let w1 = eigenvectors.column(0);
    let psi1 = samples.rows().map(|x| x.iter().zip(&w1).map(|(a, b)| a * b).sum()).collect();
    Ok(ActiveSubspace { c, eigenvalues, eigenvectors, psi1 })
}

/// `f(x₁, x₂) = exp(x₁^α + x₂)` (integer `α`, so negative `x₁` is allowed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialRidge {
    pub alpha: i32,
}

impl ExponentialRidge {
    pub fn value(&self, x: &[f64]) -> f64 {
        (x[0].powi(self.alpha) + x[1]).exp()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let f = self.value(x);
        vec![f * self.alpha as f64 * x[0].powi(self.alpha - 1), f]
    }
}
