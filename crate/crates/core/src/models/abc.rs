//! Linear mechanism `A ⇌ B → C` with rates `(k₁, k₋₁, k₂)`, started from
//! `(A, B, C) = (1, 0, 0)` and observed through `C(t)`.

use serde::{Deserialize, Serialize};

use super::ivp::OdeSystem;
use crate::error::{domain, numeric, Result};
use crate::linalg::Matrix;

/// Nonzero eigenvalues `λ₋ ≤ λ₊ < 0` of the rate matrix.
pub fn eigenvalues(k1: f64, km1: f64, k2: f64) -> Result<(f64, f64)> {
    if !(k1 > 0.0 && km1 > 0.0 && k2 > 0.0) {
        return domain(format!("rates must be positive, got ({k1}, {km1}, {k2})"));
    }
    let s = k1 + km1 + k2;
    let disc = s * s - 4.0 * k1 * k2;
    if disc < 0.0 {
        return numeric(format!("complex eigenvalues for rates ({k1}, {km1}, {k2})"));
    }
    let root = disc.sqrt();
    // λ₊ from the product λ₊λ₋ = k₁k₂ avoids cancellation.
    let lam_minus = -(s + root) / 2.0;
    let lam_plus = -2.0 * k1 * k2 / (s + root);
    Ok((lam_plus, lam_minus))
}

/// Exact product concentration `C(t)`.
pub fn product(k1: f64, km1: f64, k2: f64, t: f64) -> Result<f64> {
    let (lp, lm) = eigenvalues(k1, km1, k2)?;
    let dl = lp - lm;
    Ok(1.0 + (lm / dl) * (lp * t).exp() - (lp / dl) * (lm * t).exp())
}

pub fn k_eff(k1: f64, km1: f64, k2: f64) -> f64 {
    k1 * k2 / (k1 + km1 + k2)
}

pub fn k_eff_qssa(k1: f64, km1: f64, k2: f64) -> f64 {
    k1 * k2 / (km1 + k2)
}

/// Threshold on the compact small parameter for residual ratio `r*`.
pub fn epsilon_star(r_star: f64) -> f64 {
    0.25 * (1.0 - (r_star / (r_star + 2.0)).powi(2))
}

/// Default regime threshold (the indicative value for `r* = 6`).
pub const DEFAULT_EPSILON_STAR: f64 = 0.11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbcEffective {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `Δλ / |λ₊|`.
    pub r: f64,
    pub k_eff: f64,
    pub k_eff_qssa: f64,
    /// `k₁k₂ / (k₋₁ + k₁ + k₂)²`, in `(0, ¼]`.
    pub epsilon: f64,
    pub epsilon_star: f64,
    pub in_regime: bool,
    /// Hyperbola coordinates; the regime is `κ₁κ₂ < 2ε*/(1 - 4ε*)`.
    pub kappa: (f64, f64),
    pub times: Vec<f64>,
}

pub fn abc_effective(p: [f64; 3], epsilon_star: f64, n_times: usize, window: (f64, f64)) -> Result<AbcEffective> {
    let [k1, km1, k2] = p;
    let (lp, lm) = eigenvalues(k1, km1, k2)?;
    let s = k1 + km1 + k2;
    let eps = k1 * k2 / (s * s);
    let root = (1.0 - 4.0 * epsilon_star).sqrt();
    let shift = 2.0 * epsilon_star / (1.0 - 4.0 * epsilon_star);
    let (a, b) = (k1 / km1 - shift, k2 / km1 - shift);
    let kappa = (
        ((1.0 + root) * a + (-1.0 + root) * b) / std::f64::consts::SQRT_2,
        ((-1.0 + root) * a + (1.0 + root) * b) / std::f64::consts::SQRT_2,
    );
    Ok(AbcEffective {
        lambda_plus: lp,
        lambda_minus: lm,
        r: (lp - lm) / lp.abs(),
        k_eff: k_eff(k1, km1, k2),
        k_eff_qssa: k_eff_qssa(k1, km1, k2),
        epsilon: eps,
        epsilon_star,
        in_regime: eps < epsilon_star,
        kappa,
        times: monitor_times(lp, n_times, window),
    })
}

/// `n` uniform times on `[α_lo/|λ₊|, α_hi/|λ₊|]`.
pub fn monitor_times(lambda_plus: f64, n: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    let (a, b) = (lo / lambda_plus.abs(), hi / lambda_plus.abs());
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// `C(tᵢ)` at fixed monitoring times.
#[derive(Clone, Debug, PartialEq)]
pub struct Abc {
    pub times: Vec<f64>,
}

impl Abc {
    /// Times resolved from a reference rate triple (default window, 5 points).
    pub fn for_reference(theta: [f64; 3]) -> Result<Self> {
        let (lp, _) = eigenvalues(theta[0], theta[1], theta[2])?;
        Ok(Self { times: monitor_times(lp, 5, (0.5, 5.0)) })
    }

    pub fn outputs(&self, k1: f64, km1: f64, k2: f64) -> Result<Vec<f64>> {
        self.times.iter().map(|&t| product(k1, km1, k2, t)).collect()
    }

    pub fn field(k1: f64, km1: f64, k2: f64) -> AbcField {
        AbcField { k: [k1, km1, k2] }
    }
}

/// Full three-species rate equations.
pub struct AbcField {
    k: [f64; 3],
}

impl OdeSystem for AbcField {
    fn dim(&self) -> usize {
        3
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let [k1, km1, k2] = self.k;
        dy[0] = -k1 * y[0] + km1 * y[1];
        dy[1] = k1 * y[0] - (km1 + k2) * y[1];
        dy[2] = k2 * y[1];
    }
    fn jacobian(&self, _t: f64, _y: &[f64], jac: &mut Matrix) -> bool {
        let [k1, km1, k2] = self.k;
        *jac = Matrix::from_rows(&[[-k1, km1, 0.0], [k1, -(km1 + k2), 0.0], [0.0, k2, 0.0]]).expect("3x3");
        true
    }
}
