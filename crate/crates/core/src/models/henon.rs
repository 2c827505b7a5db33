//! A slow–fast linear system observed through a curved "mirror", with its
//! two effective parameters `(λ, a)` disguised by two Hénon iterations.
//!
//! ```text
//! X' = -λX,   εY' = -Y,        x = X + b y²,   y = Y + a x²
//! ```
//!
//! The model inputs are `(u₂, w₂)`, the second Hénon iterate of `(λ, a)`.

use crate::error::{domain, numeric, Result};

pub const HENON_A: f64 = 1.4;
pub const HENON_B: f64 = 0.3;

/// `(λ, a) ↦ (u₂, w₂)`: two iterations of the Hénon map started at `(λ, a)`.
pub fn henon_forward(lambda: f64, a: f64) -> (f64, f64) {
    let z = 1.0 - HENON_A * lambda * lambda + a;
    (1.0 - HENON_A * z * z + HENON_B * lambda, HENON_B * z)
}

/// Inverse of [`henon_forward`]; the Hénon map is a diffeomorphism, so every
/// `(u₂, w₂)` has exactly one preimage.
pub fn henon_inverse(u2: f64, w2: f64) -> Result<(f64, f64)> {
    if !(u2.is_finite() && w2.is_finite()) {
        return domain("Hénon inverse needs finite inputs");
    }
    let z = w2 / HENON_B;
    let lambda = (u2 - 1.0 + HENON_A * z * z) / HENON_B;
    let a = z - 1.0 + HENON_A * lambda * lambda;
    Ok((lambda, a))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Henon {
    pub eps: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    pub times: Vec<f64>,
}

impl Default for Henon {
    fn default() -> Self {
        Self { eps: 1e-3, b: 1e-2, x0: 1.0, y0: 1.0, times: (0..10).map(|i| 0.1 + 0.1 * i as f64).collect() }
    }
}

/// Resolves `x = X + b y², y = Y + a x²` by fixed-point iteration from `(X, Y)`.
pub fn observe(big_x: f64, big_y: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let (mut x, mut y) = (big_x, big_y);
    for _ in 0..100 {
        let xn = big_x + b * y * y;
        let yn = big_y + a * xn * xn;
        let done = (xn - x).abs() <= 1e-12 * (1.0 + xn.abs()) && (yn - y).abs() <= 1e-12 * (1.0 + yn.abs());
        x = xn;
        y = yn;
        if !(x.is_finite() && y.is_finite()) {
            break;
        }
        if done {
            return Ok((x, y));
        }
    }
    numeric(format!("observation transform did not converge for (X, Y) = ({big_x}, {big_y}), a = {a}, b = {b}"))
}

impl Henon {
    /// Outputs in the natural parameters, stacked as `[x(t₁), y(t₁), x(t₂), …]`.
    pub fn outputs_natural(&self, lambda: f64, a: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(2 * self.times.len());
        for &t in &self.times {
            let big_x = self.x0 * (-lambda * t).exp();
            let big_y = self.y0 * (-t / self.eps).exp();
            let (x, y) = observe(big_x, big_y, a, self.b)?;
            out.push(x);
            out.push(y);
        }
        Ok(out)
    }

    /// Outputs for model inputs `(u₂, w₂)`.
    pub fn outputs(&self, u2: f64, w2: f64) -> Result<Vec<f64>> {
        let (lambda, a) = henon_inverse(u2, w2)?;
        self.outputs_natural(lambda, a)
    }
}
