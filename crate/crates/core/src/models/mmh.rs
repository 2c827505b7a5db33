//! Michaelis–Menten–Henri kinetics in rescaled slow time:
//!
//! ```text
//!  s' = (κ+1) [ -(1+σ) s + σ c s + κ/(κ+1) c ]
//! εc' = (κ+1) [  (1+σ) s - σ c s - c ]
//! ```
//!
//! with `(s₀, c₀) = (1, 0)`, observed through `c` at fixed times.

use serde::{Deserialize, Serialize};

use super::ivp::{integrate_ivp, integrate_to_times, IvpOptions, Method, OdeSystem, Trajectory};
use crate::error::{domain, Result};
use crate::linalg::Matrix;

/// Below this ε the explicit integrator is not allowed.
pub const STIFF_BELOW: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MmhField {
    pub eps: f64,
    pub sigma: f64,
    pub kappa: f64,
}

impl OdeSystem for MmhField {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (s, c) = (y[0], y[1]);
        let (e, g, k) = (self.eps, self.sigma, self.kappa);
        dy[0] = (k + 1.0) * (-(1.0 + g) * s + g * c * s + k / (k + 1.0) * c);
        dy[1] = (k + 1.0) * ((1.0 + g) * s - g * c * s - c) / e;
    }
    fn jacobian(&self, _t: f64, y: &[f64], jac: &mut Matrix) -> bool {
        let (s, c) = (y[0], y[1]);
        let (e, g, k) = (self.eps, self.sigma, self.kappa);
        jac[(0, 0)] = (k + 1.0) * (-(1.0 + g) + g * c);
        jac[(0, 1)] = (k + 1.0) * (g * s) + k;
        jac[(1, 0)] = (k + 1.0) * ((1.0 + g) - g * c) / e;
        jac[(1, 1)] = (k + 1.0) * (-g * s - 1.0) / e;
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mmh {
    pub times: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Mmh {
    fn default() -> Self {
        Self { times: vec![0.5, 1.0, 1.5], rtol: 1e-8, atol: 1e-10 }
    }
}

impl Mmh {
    fn options(&self, eps: f64) -> IvpOptions {
        let method = if eps < STIFF_BELOW { Method::TrBdf2 } else { Method::Dopri5 };
        IvpOptions { method, ..IvpOptions::default() }.tolerances(self.rtol, self.atol)
    }

    /// Integrates the full model from `(1, 0)` to the last monitoring time.
    pub fn trajectory(&self, eps: f64, sigma: f64, kappa: f64, t_end: f64) -> Result<Trajectory> {
        if !(eps > 0.0 && sigma > 0.0 && kappa > 0.0) {
            return domain(format!("MMH parameters must be positive, got (ε, σ, κ) = ({eps}, {sigma}, {kappa})"));
        }
        integrate_ivp(&MmhField { eps, sigma, kappa }, (0.0, t_end), &[1.0, 0.0], &self.options(eps))
    }

    /// `c(tᵢ)` for inputs `(ε, σ, κ)`.
    pub fn outputs(&self, eps: f64, sigma: f64, kappa: f64) -> Result<Vec<f64>> {
        if !(eps > 0.0 && sigma > 0.0 && kappa > 0.0) {
            return domain(format!("MMH parameters must be positive, got (ε, σ, κ) = ({eps}, {sigma}, {kappa})"));
        }
        let ys =
            integrate_to_times(&MmhField { eps, sigma, kappa }, 0.0, &[1.0, 0.0], &self.times, &self.options(eps))?;
        Ok(ys.iter().map(|y| y[1]).collect())
    }
}

/// Leading-order (ε = 0) response `(s, c, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedResponse {
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    pub p: Vec<f64>,
}

/// Slaved complex concentration `c = (1+σ)s/(1+σs)`.
pub fn slaved_complex(sigma: f64, s: f64) -> f64 {
    (1.0 + sigma) * s / (1.0 + sigma * s)
}

/// Integrates `s' = -(1+1/σ) s/(s + 1/σ)` from `s(0) = 1`.
pub fn mmh_reduced_response(sigma: f64, times: &[f64]) -> Result<ReducedResponse> {
    if !(sigma > 0.0) {
        return domain(format!("σ must be positive, got {sigma}"));
    }
    if times.iter().any(|&t| t < 0.0) {
        return domain("times must be nonnegative");
    }
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let s = if t_end > 0.0 {
        let inv = 1.0 / sigma;
        let field = super::ivp::FnSystem::new(1, move |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -(1.0 + inv) * y[0] / (y[0] + inv);
        });
        let tr = integrate_ivp(&field, (0.0, t_end), &[1.0], &IvpOptions::default().tolerances(1e-10, 1e-13))?;
        times.iter().map(|&t| tr.sample(t)[0]).collect()
    } else {
        vec![1.0; times.len()]
    };
    let c: Vec<f64> = s.iter().map(|&s| slaved_complex(sigma, s)).collect();
    let p = s.iter().map(|s| 1.0 - s).collect();
    Ok(ReducedResponse { s, c, p })
}

/// Dimensional and nondimensional parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmhParameters {
    pub eps: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub s_total: f64,
    pub e_total: f64,
    pub k1: f64,
    pub k_minus1: f64,
    pub k2: f64,
    /// Michaelis constant `(k₋₁ + k₂)/k₁`.
    pub k_m: f64,
    /// Maximal rate `k₂ E_T`.
    pub v_m: f64,
    /// Slow time scale `(S_T + K_M)/V_M`.
    pub t_s: f64,
    /// Complex scale `E_T S_T/(S_T + K_M)`.
    pub c_bar: f64,
    /// `(1 + 1/σ) ε = E_T/S_T`.
    pub eps_h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "direction", rename_all = "kebab-case")]
pub enum MmhInput {
    /// `(S_T, E_T, k₁, k₋₁, k₂)`.
    Dimensional { s_total: f64, e_total: f64, k1: f64, k_minus1: f64, k2: f64 },
    /// `(ε, σ, κ)` plus the two scales `(K_M, V_M)` fixing units.
    Nondimensional { eps: f64, sigma: f64, kappa: f64, k_m: f64, v_m: f64 },
}

pub fn mmh_parameter_maps(input: MmhInput) -> Result<MmhParameters> {
    let (s_total, e_total, k1, k_minus1, k2) = match input {
        MmhInput::Dimensional { s_total, e_total, k1, k_minus1, k2 } => (s_total, e_total, k1, k_minus1, k2),
        MmhInput::Nondimensional { eps, sigma, kappa, k_m, v_m } => {
            let vals = [eps, sigma, kappa, k_m, v_m];
            if vals.iter().any(|v| !(*v > 0.0)) {
                return domain(format!("MMH parameters must be positive: {vals:?}"));
            }
            let s_total = sigma * k_m;
            let e_total = eps * k_m * (sigma + 1.0);
            let base = v_m / (eps * k_m * (sigma + 1.0));
            (s_total, e_total, base * (kappa + 1.0) / k_m, base * kappa, base)
        }
    };
    let vals = [s_total, e_total, k1, k_minus1, k2];
    if vals.iter().any(|v| !(*v > 0.0)) {
        return domain(format!("MMH parameters must be positive: {vals:?}"));
    }
    let k_m = (k_minus1 + k2) / k1;
    let v_m = k2 * e_total;
    let sigma = s_total / k_m;
    let eps = e_total / (s_total + k_m);
    Ok(MmhParameters {
        eps,
        sigma,
        kappa: k_minus1 / k2,
        s_total,
        e_total,
        k1,
        k_minus1,
        k2,
        k_m,
        v_m,
        t_s: (s_total + k_m) / v_m,
        c_bar: e_total * s_total / (s_total + k_m),
        eps_h: (1.0 + 1.0 / sigma) * eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_h_formula() {
        let p = mmh_parameter_maps(MmhInput::Nondimensional { eps: 0.1, sigma: 1.0, kappa: 2.0, k_m: 1.0, v_m: 1.0 })
            .unwrap();
        assert!((p.eps_h - 0.2).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let d =
            mmh_parameter_maps(MmhInput::Dimensional { s_total: 1.0, e_total: 0.01, k1: 2.0, k_minus1: 1.0, k2: 1.0 })
                .unwrap();
        assert_eq!(d.k_m, 1.0);
        let back = mmh_parameter_maps(MmhInput::Nondimensional {
            eps: d.eps,
            sigma: d.sigma,
            kappa: d.kappa,
            k_m: d.k_m,
            v_m: d.v_m,
        })
        .unwrap();
        for (a, b) in [(back.s_total, 1.0), (back.e_total, 0.01), (back.k1, 2.0), (back.k_minus1, 1.0), (back.k2, 1.0)]
        {
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
        // ε_h = E_T/S_T.
        assert!((d.eps_h - 0.01).abs() < 1e-15);
    }

    #[test]
    fn reduced_half_life() {
        // ln s + σ s = σ - (1+σ) t  ⇒  s = ½ at t = (1 - ln ½ - ½)/2 for σ = 1.
        let t_half = (1.0 - 0.5f64.ln() - 0.5) / 2.0;
        assert!((t_half - 0.5966).abs() < 1e-4);
        let r = mmh_reduced_response(1.0, &[0.0, t_half]).unwrap();
        assert_eq!((r.s[0], r.c[0], r.p[0]), (1.0, 1.0, 0.0));
        assert!((r.s[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn saturated_limit() {
        let sigma: f64 = 1e6;
        let rate = (1.0 + 1.0 / sigma) * 1.0 / (1.0 + 1.0 / sigma);
        assert!((rate - 1.0).abs() < 1e-12);
        let r = mmh_reduced_response(sigma, &[0.1]).unwrap();
        assert!((r.s[0] - 0.9).abs() < 1e-5);
    }

    /// The four-species form with `e` and `p` carried as states.
    struct FourSpecies(MmhField);

    impl OdeSystem for FourSpecies {
        fn dim(&self) -> usize {
            4
        }
        fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
            let mut d2 = [0.0; 2];
            self.0.rhs(t, &y[..2], &mut d2);
            let MmhField { eps, sigma, .. } = self.0;
            dy[0] = d2[0];
            dy[1] = d2[1];
            dy[2] = -sigma / (sigma + 1.0) * d2[1];
            dy[3] = -d2[0] - eps * d2[1];
        }
    }

    #[test]
    fn conservation_along_trajectory() {
        let rtol = 1e-8;
        for (eps, method) in [(0.01, Method::TrBdf2), (0.2, Method::Dopri5)] {
            let sigma = 2.0;
            let sys = FourSpecies(MmhField { eps, sigma, kappa: 1.0 });
            let opts = IvpOptions { method, ..IvpOptions::default() };
            let tr = integrate_ivp(&sys, (0.0, 1.5), &[1.0, 0.0, 1.0, 0.0], &opts).unwrap();
            for y in &tr.y {
                let (s, c, e, p) = (y[0], y[1], y[2], y[3]);
                assert!((e + sigma * c / (sigma + 1.0) - 1.0).abs() < 10.0 * rtol);
                assert!((s + eps * c + p - 1.0).abs() < 10.0 * rtol);
            }
        }
    }

    #[test]
    fn full_model_tracks_reduced_model() {
        let m = Mmh { times: vec![1.0], ..Mmh::default() };
        let c = m.outputs(1e-4, 1.0, 1.0).unwrap()[0];
        let r = mmh_reduced_response(1.0, &[1.0]).unwrap();
        assert!((c - r.c[0]).abs() < 0.01 * r.c[0], "{c} vs {}", r.c[0]);
    }
}
