//! Non-identifiable caricature `f_ε(p₁, p₂) = (p₁p₂ + 2ε(p₁ - p₂), ln p₁p₂, (p₁p₂)²)`.

use crate::error::{domain, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Toy {
    /// Perturbation strength ε (0 gives exact non-identifiability).
    pub perturbation: f64,
}

impl Toy {
    pub fn outputs(&self, p1: f64, p2: f64) -> Result<Vec<f64>> {
        let e = p1 * p2;
        if !(e > 0.0) {
            return domain(format!("toy model needs p₁p₂ > 0, got {e}"));
        }
        Ok(vec![e + 2.0 * self.perturbation * (p1 - p2), e.ln(), e * e])
    }

    /// Exact 3×2 Jacobian.
    pub fn jacobian(&self, p1: f64, p2: f64) -> Result<Matrix> {
        if !(p1 * p2 > 0.0) {
            return domain("toy model needs p₁p₂ > 0");
        }
        let e = self.perturbation;
        Matrix::from_rows(&[
            [p2 + 2.0 * e, p1 - 2.0 * e],
            [1.0 / p1, 1.0 / p2],
            [2.0 * p1 * p2 * p2, 2.0 * p1 * p1 * p2],
        ])
    }
}
