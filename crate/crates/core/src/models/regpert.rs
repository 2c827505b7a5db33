//! Regularly perturbed prototype `x' = -x + εx³`, with closed form
//! `x(t) = (ε + e^{2t}(1/x₀² - ε))^{-1/2}`. Inputs are `(ε, x₀)`.

use super::ivp::OdeSystem;
use crate::error::{domain, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Regpert {
    pub times: Vec<f64>,
}

impl Default for Regpert {
    fn default() -> Self {
        Self { times: vec![0.25, 1.0, 1.75] }
    }
}

/// Exact solution; errors past the finite-time blow-up.
pub fn solution(eps: f64, x0: f64, t: f64) -> Result<f64> {
    if !(x0 > 0.0) {
        return domain(format!("regular perturbation model needs x₀ > 0, got {x0}"));
    }
    let denom = eps + (2.0 * t).exp() * (1.0 / (x0 * x0) - eps);
    if !(denom > 0.0) {
        return domain(format!("solution blows up before t = {t} (ε x₀² = {})", eps * x0 * x0));
    }
    Ok(denom.powf(-0.5))
}

impl Regpert {
    pub fn outputs(&self, eps: f64, x0: f64) -> Result<Vec<f64>> {
        if !(eps >= 0.0) {
            return domain(format!("ε must be nonnegative, got {eps}"));
        }
        self.times.iter().map(|&t| solution(eps, x0, t)).collect()
    }

    pub fn field(eps: f64) -> RegpertField {
        RegpertField { eps }
    }
}

pub struct RegpertField {
    eps: f64,
}

impl OdeSystem for RegpertField {
    fn dim(&self) -> usize {
        1
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0] + self.eps * y[0].powi(3);
    }
}
