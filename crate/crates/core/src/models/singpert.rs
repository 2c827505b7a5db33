//! Singularly perturbed linear prototype
//!
//! ```text
//! x' = 2 - x - y,     ε y' = x - y,
//! ```
//!
//! observed through `y` at fixed times. Inputs are `(ε, y₀)`; `x₀` is fixed.

use super::ivp::OdeSystem;
use crate::autodiff::{Dual, Scalar};
use crate::error::{domain, Result};
use crate::linalg::Matrix;

/// `e^{Jt}` components for `J = [[-1, -1], [1/ε, -1/ε]]`, written as
/// `e^{τt} (c I + s (J - τ I))` with `τ = tr J / 2`. Evaluated through split
/// exponentials so that large `|J| t` never overflows.
fn propagator<S: Scalar>(eps: S, t: f64) -> (S, S, S) {
    let inv = S::cst(1.0) / eps;
    let tau = -(inv + 1.0) * 0.5;
    let det = inv * 2.0;
    let disc = tau * tau - det;
    let z = disc * (t * t);
    let (ec, es) = if z.value().abs() < 1e-2 {
        // e^{τt} [cosh(ωt), sinh(ωt)/ω] by series in z = ω²t².
        let mut c = S::cst(1.0);
        let mut s = S::cst(1.0);
        let mut term_c = S::cst(1.0);
        let mut term_s = S::cst(1.0);
        for n in 1..8 {
            let nf = n as f64;
            term_c = term_c * z / ((2.0 * nf - 1.0) * (2.0 * nf));
            term_s = term_s * z / ((2.0 * nf) * (2.0 * nf + 1.0));
            c = c + term_c;
            s = s + term_s;
        }
        let e = (tau * t).exp();
        (e * c, e * s * t)
    } else if disc.value() > 0.0 {
        let w = disc.sqrt();
        let ep = ((tau + w) * t).exp();
        let em = ((tau - w) * t).exp();
        ((ep + em) * 0.5, (ep - em) / (w * 2.0))
    } else {
        let w = (-disc).sqrt();
        let e = (tau * t).exp();
        (e * (w * t).cos(), e * (w * t).sin() / w)
    };
    (ec, es, tau)
}

/// Exact `(x(t), y(t))` for the prototype.
pub fn solution<S: Scalar>(eps: S, x0: S, y0: S, t: f64) -> (S, S) {
    let (c, s, tau) = propagator(eps, t);
    let inv = S::cst(1.0) / eps;
    // Deviations from the fixed point (1, 1).
    let u = x0 - 1.0;
    let v = y0 - 1.0;
    // J - τI
    let j11 = -tau - 1.0;
    let j12 = S::cst(-1.0);
    let j21 = inv;
    let j22 = -inv - tau;
    let xu = c * u + s * (j11 * u + j12 * v);
    let yv = c * v + s * (j21 * u + j22 * v);
    (xu + 1.0, yv + 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Singpert {
    pub x0: f64,
    pub times: Vec<f64>,
}

impl Default for Singpert {
    fn default() -> Self {
        Self { x0: -1.0, times: vec![0.5, 1.0, 1.5] }
    }
}

impl Singpert {
    fn check(eps: f64) -> Result<()> {
        if !(eps > 0.0 && eps.is_finite()) {
            return domain(format!("singular perturbation ε must be positive, got {eps}"));
        }
        Ok(())
    }

    /// `y(tᵢ)` for inputs `(ε, y₀)`.
    pub fn outputs(&self, eps: f64, y0: f64) -> Result<Vec<f64>> {
        Self::check(eps)?;
        Ok(self.times.iter().map(|&t| solution(eps, self.x0, y0, t).1).collect())
    }

    /// Exact 3×2 Jacobian `∂y(tᵢ)/∂(ε, y₀)`.
    pub fn jacobian(&self, eps: f64, y0: f64) -> Result<Matrix> {
        Self::check(eps)?;
        let n = self.times.len();
        let mut j = Matrix::zeros(n, 2);
        for (i, &t) in self.times.iter().enumerate() {
            j[(i, 0)] = solution(Dual::var(eps), Dual::cst(self.x0), Dual::cst(y0), t).1.du;
            j[(i, 1)] = solution(Dual::cst(eps), Dual::cst(self.x0), Dual::var(y0), t).1.du;
        }
        Ok(j)
    }

    /// The vector field, for cross-checks against the integrators.
    pub fn field(eps: f64) -> SingpertField {
        SingpertField { eps }
    }
}

pub struct SingpertField {
    eps: f64,
}

impl OdeSystem for SingpertField {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = 2.0 - y[0] - y[1];
        dy[1] = (y[0] - y[1]) / self.eps;
    }
    fn jacobian(&self, _t: f64, _y: &[f64], jac: &mut Matrix) -> bool {
        jac[(0, 0)] = -1.0;
        jac[(0, 1)] = -1.0;
        jac[(1, 0)] = 1.0 / self.eps;
        jac[(1, 1)] = -1.0 / self.eps;
        true
    }
}
