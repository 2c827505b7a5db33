//! Picking eigenvectors that parameterize *new* directions.
//!
//! Many diffusion eigenvectors are harmonics — functions of earlier ones.
//! A candidate `ψₖ` counts as new when a local linear regression of `ψₖ` on
//! the already-chosen coordinates leaves a large normalized residual.

use serde::{Deserialize, Serialize};

use super::DiffusionSpectrum;
use crate::error::{config, Result};
use crate::linalg::{solve, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectOptions {
    /// Residual above which a candidate counts as independent.
    pub threshold: f64,
    /// Neighbourhood size of the local linear fits.
    pub neighbors: usize,
    /// Only eigenvectors `1..=max_candidates` are examined (default: all computed).
    pub max_candidates: Option<usize>,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self { threshold: 0.2, neighbors: 16, max_candidates: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSelection {
    /// Chosen eigenvector indices, in selection order (ψ₁ first).
    pub indices: Vec<usize>,
    /// Candidate indices examined, ascending.
    pub candidates: Vec<usize>,
    /// Residual score of each candidate against the coordinates chosen before it.
    pub scores: Vec<f64>,
    /// False when fewer than the requested number of coordinates were found.
    pub complete: bool,
}

/// For every point, its `k` nearest other points in the rows of `x`,
/// as `(index, distance)` sorted by distance.
fn neighbor_lists(x: &Matrix, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = x.nrows();
    let mut out = Vec::with_capacity(n);
    let mut buf: Vec<(usize, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        buf.clear();
        let xi = x.row(i);
        for j in 0..n {
            if j != i {
                buf.push((j, crate::linalg::sq_dist(xi, x.row(j))));
            }
        }
        let kk = k.min(buf.len());
        if kk < buf.len() {
            buf.select_nth_unstable_by(kk, |a, b| a.1.total_cmp(&b.1));
        }
        let mut nb: Vec<(usize, f64)> = buf[..kk].iter().map(|&(j, d)| (j, d.sqrt())).collect();
        nb.sort_by(|a, b| a.1.total_cmp(&b.1));
        out.push(nb);
    }
    out
}

fn residual_with_neighbors(x: &Matrix, target: &[f64], nbrs: &[Vec<(usize, f64)>]) -> f64 {
    let n = target.len();
    let dim = x.ncols();
    let p = dim + 1;
    let mean = target.iter().sum::<f64>() / n as f64;
    let total: f64 = target.iter().map(|t| (t - mean).powi(2)).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut sse = 0.0;
    for i in 0..n {
        let nb = &nbrs[i];
        let h = nb.last().map_or(1.0, |l| l.1).max(f64::MIN_POSITIVE);
        let mut xtx = Matrix::zeros(p, p);
        let mut xty = vec![0.0; p];
        let mut row = vec![0.0; p];
        for &(j, d) in nb {
            let w = (-(d / h).powi(2)).exp();
            row[0] = 1.0;
            for c in 0..dim {
                row[c + 1] = x[(j, c)] - x[(i, c)];
            }
            for a in 0..p {
                xty[a] += w * row[a] * target[j];
                for b in 0..p {
                    xtx[(a, b)] += w * row[a] * row[b];
                }
            }
        }
        let trace: f64 = (0..p).map(|a| xtx[(a, a)]).sum();
        for a in 0..p {
            xtx[(a, a)] += 1e-10 * trace.max(f64::MIN_POSITIVE);
        }
        let pred = match solve(&xtx, &xty) {
            Ok(beta) => beta[0],
            Err(_) => xty[0] / xtx[(0, 0)],
        };
        sse += (target[i] - pred).powi(2);
    }
    (sse / total).sqrt().clamp(0.0, 1.0)
}

/// Normalized leave-one-out local-linear-regression residual of `target`
/// given `predictors` (`L × d`). Near 0: `target` is a function of the
/// predictors; near 1: it is not.
pub fn local_linear_residual(predictors: &Matrix, target: &[f64], neighbors: usize) -> Result<f64> {
    if predictors.nrows() != target.len() {
        return config("predictor and target lengths differ");
    }
    if target.len() < 3 || neighbors < 2 {
        return config("local regression needs at least 3 points and 2 neighbours");
    }
    let nbrs = neighbor_lists(predictors, neighbors);
    Ok(residual_with_neighbors(predictors, target, &nbrs))
}

pub fn select_independent_coordinates(
    spectrum: &DiffusionSpectrum,
    count: usize,
    opts: SelectOptions,
) -> Result<EmbeddingSelection> {
    if !(opts.threshold > 0.0 && opts.threshold < 1.0) {
        return config(format!("residual threshold must lie in (0, 1), got {}", opts.threshold));
    }
    if count == 0 {
        return config("at least one coordinate must be requested");
    }
    let available = spectrum.nontrivial();
    let last = opts.max_candidates.map_or(available, |m| m.min(available));
    if last < 1 {
        return config("spectrum has no nontrivial eigenvectors");
    }
    let n = spectrum.len();
    let mut indices = vec![1usize];
    let mut candidates = vec![1usize];
    let mut scores = vec![1.0];
    let mut chosen = Matrix::from_fn(n, 1, |i, _| spectrum.eigenvectors[(i, 1)]);
    let mut nbrs = neighbor_lists(&chosen, opts.neighbors);
    for k in 2..=last {
        if indices.len() >= count {
            break;
        }
        let target = spectrum.psi(k);
        let score = residual_with_neighbors(&chosen, &target, &nbrs);
        candidates.push(k);
        scores.push(score);
        if score > opts.threshold {
            indices.push(k);
            chosen = Matrix::from_fn(n, indices.len(), |i, c| spectrum.eigenvectors[(i, indices[c])]);
            nbrs = neighbor_lists(&chosen, opts.neighbors);
        }
    }
    let complete = indices.len() >= count;
    Ok(EmbeddingSelection { indices, candidates, scores, complete })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_extremes() {
        let n = 400;
        let x = Matrix::from_fn(n, 1, |i, _| i as f64 / n as f64);
        let same = x.column(0);
        assert!(local_linear_residual(&x, &same, 16).unwrap() < 1e-6);
        let smooth: Vec<f64> = same.iter().map(|v| (3.0 * v).cos()).collect();
        assert!(local_linear_residual(&x, &smooth, 16).unwrap() < 0.01);
        // A sequence unrelated to x.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let wild: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        assert!(local_linear_residual(&x, &wild, 16).unwrap() > 0.9);
    }
}
