use serde::{Deserialize, Serialize};

use super::{AffinityMatrix, KernelSpec, PointCloud};
use crate::error::{config, numeric, Result};
use crate::linalg::{sym_eigen, sym_eigen_top, Matrix, SubspaceOptions};

/// Density-normalized kernel `W = A / (q qᵀ)` with degrees `D = W 𝟙`.
#[derive(Clone, Debug)]
pub struct MarkovOperator {
    pub w: Matrix,
    pub degrees: Vec<f64>,
    /// Row sums of the raw affinity, needed to normalize Nyström queries.
    pub q: Vec<f64>,
}

impl MarkovOperator {
    /// Row-stochastic `M = D⁻¹ W`.
    pub fn markov(&self) -> Matrix {
        let n = self.w.nrows();
        Matrix::from_fn(n, n, |i, j| self.w[(i, j)] / self.degrees[i])
    }

    /// Random-walk Laplacian `L = I - M`.
    pub fn laplacian(&self) -> Matrix {
        let n = self.w.nrows();
        Matrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - self.w[(i, j)] / self.degrees[i])
    }

    /// Symmetric conjugate `D^(-1/2) W D^(-1/2)`, similar to `M`.
    pub fn symmetric(&self) -> Matrix {
        let n = self.w.nrows();
        let s: Vec<f64> = self.degrees.iter().map(|d| d.sqrt()).collect();
        Matrix::from_fn(n, n, |i, j| self.w[(i, j)] / (s[i] * s[j]))
    }
}

pub fn density_normalized_laplacian(aff: &AffinityMatrix) -> Result<MarkovOperator> {
    let n = aff.a.nrows();
    if aff.q.iter().any(|&q| !(q > 0.0)) {
        return numeric("affinity row sum is not positive");
    }
    let mut w = Matrix::from_fn(n, n, |i, j| aff.a[(i, j)] / (aff.q[i] * aff.q[j]));
    // Enforce exact symmetry so the conjugated operator is symmetric bit-for-bit.
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let degrees: Vec<f64> = w.rows().map(|r| r.iter().sum()).collect();
    if degrees.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return numeric("degenerate degree in normalized kernel");
    }
    Ok(MarkovOperator { w, degrees, q: aff.q.clone() })
}

/// Eigensolver controls.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    /// Clouds up to this size use a full dense decomposition.
    pub dense_limit: usize,
    pub subspace: SubspaceOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { dense_limit: 5000, subspace: SubspaceOptions::default() }
    }
}

/// Leading diffusion eigenpairs plus what Nyström extension needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiffusionSpectrum {
    /// `λ₀ ≤ λ₁ ≤ … ≤ λ_k` of `L = I - M`.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is `ψᵢ`, normalized so `Σ πⱼ ψᵢ(j)² = 1` (hence `ψ₀ ≡ 1`).
    pub eigenvectors: Matrix,
    /// Stationary distribution `π = D 𝟙 / Σ D`.
    pub stationary: Vec<f64>,
    pub kernel: KernelSpec,
    /// Raw affinity row sums of the training cloud.
    pub q: Vec<f64>,
    pub cloud: PointCloud,
}

impl DiffusionSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of nontrivial eigenpairs (`k`).
    pub fn nontrivial(&self) -> usize {
        self.eigenvalues.len().saturating_sub(1)
    }

    pub fn psi(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// `Σ π ψᵢ ψⱼ`.
    pub fn weighted_inner(&self, i: usize, j: usize) -> f64 {
        (0..self.len()).map(|r| self.stationary[r] * self.eigenvectors[(r, i)] * self.eigenvectors[(r, j)]).sum()
    }
}

pub fn spectral_decompose(
    op: &MarkovOperator,
    k: usize,
    cloud: &PointCloud,
    kernel: &KernelSpec,
    opts: SpectrumOptions,
) -> Result<DiffusionSpectrum> {
    let n = op.w.nrows();
    if k >= n {
        return config(format!("requested {k} nontrivial eigenpairs from {n} points"));
    }
    if cloud.len() != n {
        return config("cloud size does not match operator size");
    }
    let s = op.symmetric();
    // (μ, v) pairs, μ descending.
    let (mu, v): (Vec<f64>, Matrix) = if n <= opts.dense_limit {
        let e = sym_eigen(&s)?;
        let cols: Vec<usize> = (0..=k).map(|j| n - 1 - j).collect();
        let mu = cols.iter().map(|&c| e.values[c]).collect();
        (mu, Matrix::from_fn(n, k + 1, |i, j| e.vectors[(i, cols[j])]))
    } else {
        let e = sym_eigen_top(&s, k + 1, opts.subspace)?;
        (e.values, e.vectors)
    };
    let total: f64 = op.degrees.iter().sum();
    let stationary: Vec<f64> = op.degrees.iter().map(|d| d / total).collect();
    let scale = total.sqrt();
    let mut psi = Matrix::from_fn(n, k + 1, |i, j| v[(i, j)] * scale / op.degrees[i].sqrt());
    for j in 0..=k {
        orient(&mut psi, j);
    }
    let eigenvalues = mu.iter().map(|m| (1.0 - m).max(0.0)).collect();
    Ok(DiffusionSpectrum {
        eigenvalues,
        eigenvectors: psi,
        stationary,
        kernel: *kernel,
        q: op.q.clone(),
        cloud: cloud.clone(),
    })
}

/// Flip a column so its largest-magnitude entry is positive.
fn orient(m: &mut Matrix, j: usize) {
    let mut best = 0.0f64;
    for i in 0..m.nrows() {
        if m[(i, j)].abs() > best.abs() {
            best = m[(i, j)];
        }
    }
    if best < 0.0 {
        for i in 0..m.nrows() {
            m[(i, j)] = -m[(i, j)];
        }
    }
}

/// Coordinates handed back by [`embed`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedMode {
    /// `ψᵢ` as stored.
    Raw,
    /// `e^(λᵢ ε) ψᵢ`.
    Scaled,
}

/// Per-point coordinates for the selected eigenvectors (L × indices.len()).
pub fn embed(spectrum: &DiffusionSpectrum, indices: &[usize], eps: f64, mode: EmbedMode) -> Result<Matrix> {
    for &i in indices {
        if i == 0 {
            return config("the trivial eigenvector ψ₀ cannot be used as an embedding coordinate");
        }
        if i > spectrum.nontrivial() {
            return config(format!("eigenvector {i} was not computed (k = {})", spectrum.nontrivial()));
        }
    }
    let mult: Vec<f64> = indices
        .iter()
        .map(|&i| match mode {
            EmbedMode::Raw => 1.0,
            EmbedMode::Scaled => (spectrum.eigenvalues[i] * eps).exp(),
        })
        .collect();
    Ok(Matrix::from_fn(spectrum.len(), indices.len(), |r, c| mult[c] * spectrum.eigenvectors[(r, indices[c])]))
}
