use serde::{Deserialize, Serialize};

use super::{Dissimilarity, KernelFamily, KernelSpec, ScaleConvention};
use crate::error::{config, Result};
use crate::linalg::Matrix;

/// Error-optimal bandwidth `ε = C · N^(-2/(6+m))` for an `m`-dimensional manifold.
pub fn formula_scale(n: usize, m: usize, c: f64) -> Result<f64> {
    if n < 2 {
        return config(format!("scale formula needs N ≥ 2, got {n}"));
    }
    if m < 1 {
        return config("intrinsic dimension must be at least 1");
    }
    if !(c > 0.0) {
        return config(format!("scale constant must be positive, got {c}"));
    }
    Ok(c * (n as f64).powf(-2.0 / (6.0 + m as f64)))
}

/// Median of the strictly upper-triangular entries of a squared-distance matrix.
pub fn median_sq_distance(d: &Matrix) -> Result<f64> {
    let n = d.nrows();
    if n < 2 {
        return config("median heuristic needs at least 2 points");
    }
    let mut v: Vec<f64> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| d[(i, j)]).collect();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    Ok(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
}

/// How an experiment chooses its kernel denominator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ScaleRule {
    /// A bandwidth ε given in some convention.
    Fixed { epsilon: f64, convention: ScaleConvention },
    /// `ε = C N^(-2/(6+m))`, then converted.
    Formula { constant: f64, dimension: usize, convention: ScaleConvention },
    /// Median pairwise squared distance of the kernel's primary channel times a multiplier.
    Median { multiplier: f64 },
}

impl Default for ScaleRule {
    fn default() -> Self {
        Self::Median { multiplier: 1.0 }
    }
}

impl ScaleRule {
    /// Resolves the rule to a full denominator for a given cloud size and distances.
    pub fn resolve(&self, n: usize, family: KernelFamily, d: &Dissimilarity) -> Result<f64> {
        match *self {
            Self::Fixed { epsilon, convention } => {
                if !(epsilon > 0.0) {
                    return config(format!("kernel bandwidth must be positive, got {epsilon}"));
                }
                Ok(convention.denominator(epsilon))
            }
            Self::Formula { constant, dimension, convention } => {
                Ok(convention.denominator(formula_scale(n, dimension, constant)?))
            }
            Self::Median { multiplier } => {
                if !(multiplier > 0.0) {
                    return config("median multiplier must be positive");
                }
                let channel = match family {
                    KernelFamily::InputOnly | KernelFamily::Mixed { .. } => d.input.as_ref(),
                    _ => d.output.as_ref(),
                };
                let m = channel.ok_or_else(|| crate::Error::Config("missing distance channel".into()))?;
                let med = median_sq_distance(m)?;
                if !(med > 0.0) {
                    return config("median squared distance is zero; all points coincide");
                }
                Ok(multiplier * med)
            }
        }
    }

    /// Convenience: a [`KernelSpec`] with the resolved scale.
    pub fn kernel(&self, family: KernelFamily, n: usize, d: &Dissimilarity) -> Result<KernelSpec> {
        Ok(KernelSpec { family, scale: self.resolve(n, family, d)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        assert!((formula_scale(10_000, 2, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(formula_scale(1, 2, 1.0).is_err());
        assert!(formula_scale(10, 0, 1.0).is_err());
    }

    #[test]
    fn median_of_three_collinear_points() {
        // Pairwise squared distances {1, 1, 4}.
        let d = Matrix::from_rows(&[[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]]).unwrap();
        assert_eq!(median_sq_distance(&d).unwrap(), 1.0);
    }
}
