//! Nonisothermal first-order catalyst pellet (sphere) and its effectiveness
//! factor curve `η(Φ)`.
//!
//! The interior equation is the Weisz–Hicks reduction
//!
//! ```text
//! u'' + (2/r) u' = Φ² R(u),   R(u) = u exp(γβ(1-u) / (1 + β(1-u)))
//! u'(0) = 0,   u(1) = 1,      η = 3 u'(1) / Φ²
//! ```
//!
//! Curves are traced by shooting from the center value `u_c`: in the scaled
//! radius `ρ = Φr` the problem has no `Φ`, and the surface condition `u = 1`
//! is reached at `ρ = Φ(u_c)`. Sweeping `u_c` therefore traverses every
//! branch of a multivalued `η(Φ)` in order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, numeric, Result};
use crate::models::ivp::{integrate_ivp, integrate_with_event, IvpOptions, OdeSystem, Termination};

/// Series start radius at the center.
const R0: f64 = 1e-6;
const RTOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PelletParams {
    pub phi: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PelletParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return config(format!("Thiele modulus must be positive, got {}", self.phi));
        }
        validate_physics(self.beta, self.gamma)
    }
}

fn validate_physics(beta: f64, gamma: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return config(format!("β must be nonnegative, got {beta}"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return config(format!("γ must be positive, got {gamma}"));
    }
    Ok(())
}

/// Reaction term with the temperature eliminated through `T = 1 + β(1-u)`.
pub fn reaction(beta: f64, gamma: f64, u: f64) -> f64 {
    let d = beta * (1.0 - u);
    u * (gamma * d / (1.0 + d)).exp()
}

/// `η = 3(Φ coth Φ - 1)/Φ²` for the isothermal pellet.
pub fn isothermal_eta(phi: f64) -> f64 {
    if phi < 1e-3 {
        let p2 = phi * phi;
        return 1.0 - p2 / 15.0 + 2.0 * p2 * p2 / 315.0;
    }
    3.0 * (phi / phi.tanh() - 1.0) / (phi * phi)
}

/// `y = (u, u')` in radius `r`, with `u'' = k² R(u) - 2u'/r`.
struct PelletField {
    beta: f64,
    gamma: f64,
    k2: f64,
}

impl OdeSystem for PelletField {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, r: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = self.k2 * reaction(self.beta, self.gamma, y[0]) - 2.0 * y[1] / r;
    }
}

fn series_start(field: &PelletField, u_c: f64) -> [f64; 2] {
    let rc = field.k2 * reaction(field.beta, field.gamma, u_c);
    [u_c + rc * R0 * R0 / 6.0, rc * R0 / 3.0]
}

fn options(u_c: f64) -> IvpOptions {
    IvpOptions::default().tolerances(RTOL, 1e-14 * u_c)
}

fn check_center(u_c: f64) -> Result<()> {
    if !(u_c > 0.0 && u_c <= 1.0) {
        return domain(format!("center value must lie in (0, 1], got {u_c}"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    /// `u(1)`.
    pub surface: f64,
    pub eta: f64,
}

impl Profile {
    /// The surface value overshoots the boundary condition `u(1) = 1`,
    /// i.e. the trial center value was too large.
    pub fn overshoots(&self) -> bool {
        self.surface > 1.0
    }
}

/// Integrates from the center with `u(0) = u_c` to `r = 1` at fixed `Φ`.
pub fn solve_profile(params: PelletParams, u_c: f64) -> Result<Profile> {
    params.validate()?;
    check_center(u_c)?;
    let field = PelletField { beta: params.beta, gamma: params.gamma, k2: params.phi * params.phi };
    let tr = integrate_ivp(&field, (R0, 1.0), &series_start(&field, u_c), &options(u_c))?;
    let y = tr.last();
    if !(y[0] > 0.0 && y[0].is_finite() && y[1].is_finite()) {
        return numeric(format!("profile left the admissible range (u(1) = {})", y[0]));
    }
    Ok(Profile { surface: y[0], eta: 3.0 * y[1] / (params.phi * params.phi) })
}

/// One point of the response curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub phi: f64,
    pub eta: f64,
    pub arclength: f64,
    pub u_center: f64,
}

/// `(Φ, η)` for center value `u_c`, by shooting in `ρ = Φr` until `u = 1`.
pub fn shoot(beta: f64, gamma: f64, u_c: f64) -> Result<(f64, f64)> {
    validate_physics(beta, gamma)?;
    check_center(u_c)?;
    if u_c == 1.0 {
        return Ok((0.0, 1.0));
    }
    let field = PelletField { beta, gamma, k2: 1.0 };
    let (_, term) = integrate_with_event(
        &field,
        (R0, 1e4),
        &series_start(&field, u_c),
        &options(u_c),
        Some(|_r: f64, y: &[f64]| y[0] - 1.0),
    )?;
    match term {
        Termination::Event { t, y } => Ok((t, 3.0 * y[1] / t)),
        Termination::Completed => numeric(format!("surface condition never reached for u_c = {u_c:e}")),
    }
}

/// `n` points uniform in `ln Φ` on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return config(format!("log grid needs 0 < lo < hi and n ≥ 2, got ({lo}, {hi}, {n})"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub beta: f64,
    pub gamma: f64,
    /// Ordered by decreasing `u_c`, i.e. by arclength.
    pub points: Vec<CurvePoint>,
    /// Target `Φ` values for which no root was bracketed.
    pub gaps: Vec<f64>,
}

impl ResponseCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn phi(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.phi).collect()
    }
    pub fn eta(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.eta).collect()
    }
    pub fn arclength(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.arclength).collect()
    }
}

/// Options for the center-value sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Coarse sweep points per unit of `ln u_c`.
    pub density: f64,
    /// Smallest center value explored.
    pub min_center: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { density: 12.0, min_center: 1e-300 }
    }
}

/// Traces the curve through every `Φ` in `grid` (any order), collecting
/// all roots of `Φ(u_c) = Φ_target` along a monotone sweep of `u_c`.
pub fn trace_curve(beta: f64, gamma: f64, grid: &[f64], opts: &TraceOptions) -> Result<ResponseCurve> {
    validate_physics(beta, gamma)?;
    if grid.is_empty() || grid.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return config("Φ grid must be nonempty and positive");
    }
    let phi_max = grid.iter().copied().fold(0.0, f64::max);
    let phi_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let h = 1.0 / opts.density;
    let z_floor = opts.min_center.ln();

    // Coarse sweep in z = ln u_c from just below 1 until Φ passes the grid.
    let mut z = -1e-6f64;
    while shoot(beta, gamma, z.exp())?.0 >= phi_min && z < -1e-15 {
        z /= 10.0;
    }
    let mut sweep: Vec<(f64, f64)> = vec![(z, shoot(beta, gamma, z.exp())?.0)];
    let mut past = 0usize;
    loop {
        let zn = (sweep.last().unwrap().0 - h).max(z_floor);
        let phi = shoot(beta, gamma, zn.exp())?.0;
        sweep.push((zn, phi));
        // Keep going a little past the top of the grid to catch folds.
        if phi > phi_max {
            past += 1;
        }
        if past >= 4 || zn <= z_floor {
            break;
        }
    }

    let mut roots: Vec<(f64, f64)> = Vec::new();
    let mut gaps = Vec::new();
    for &target in grid {
        let mut found = false;
        for w in sweep.windows(2) {
            let (g0, g1) = (w[0].1 - target, w[1].1 - target);
            if g0 == 0.0 {
                roots.push((w[0].0, target));
                found = true;
            } else if g0.signum() != g1.signum() && g1 != 0.0 {
                let zr = bracket_root(|z| Ok(shoot(beta, gamma, z.exp())?.0 - target), w[0].0, w[1].0, g0, g1)?;
                roots.push((zr, target));
                found = true;
            }
        }
        if let Some(&(zl, pl)) = sweep.last() {
            if pl == target {
                roots.push((zl, target));
                found = true;
            }
        }
        if !found {
            gaps.push(target);
        }
    }
    roots.sort_by(|a, b| b.0.total_cmp(&a.0));
    roots.dedup_by(|a, b| a.0 == b.0);

    let mut points = Vec::with_capacity(roots.len());
    for (zr, target) in roots {
        let u_c = zr.exp();
        let (_, eta) = shoot(beta, gamma, u_c)?;
        points.push(CurvePoint { phi: target, eta, arclength: 0.0, u_center: u_c });
    }
    assign_arclength(&mut points);
    Ok(ResponseCurve { beta, gamma, points, gaps })
}

/// Cumulative arclength in `(ln Φ, ln η)`.
fn assign_arclength(points: &mut [CurvePoint]) {
    let mut s = 0.0;
    for i in 0..points.len() {
        if i > 0 {
            let (a, b) = (points[i - 1], points[i]);
            s += ((b.phi / a.phi).ln().powi(2) + (b.eta / a.eta).ln().powi(2)).sqrt();
        }
        points[i].arclength = s;
    }
}

/// Illinois (modified regula falsi) on a sign-changing bracket.
fn bracket_root(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() <= 1e-14 * (1.0 + c.abs()) {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fc.abs() <= 1e-15 {
            return Ok(c);
        }
    }
    Ok(0.5 * (a + b))
}

/// Pairs `(ηᵢ, η_{i+Δ})` from a curve on a regular `ln Φ` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayPairSet {
    /// Offset in grid steps.
    pub offset: usize,
    /// Offset in `ln Φ`.
    pub delta: f64,
    pub pairs: Vec<[f64; 2]>,
    /// Index of the first member of each pair in the source curve.
    pub source: Vec<usize>,
}

/// Grid step of a curve sampled on a regular `ln Φ` grid.
pub fn log_step(curve: &ResponseCurve) -> Result<f64> {
    let p = &curve.points;
    if p.len() < 2 {
        return config("delay pairs need at least two curve points");
    }
    let step = (p[1].phi / p[0].phi).ln();
    let irregular =
        !(step > 0.0) || p.windows(2).any(|w| ((w[1].phi / w[0].phi).ln() - step).abs() > 1e-6 * step.abs().max(1e-12));
    if irregular {
        return config("curve is not sampled on a regular increasing ln Φ grid");
    }
    Ok(step)
}

/// Offset (in grid steps) closest to `delta` in `ln Φ`.
pub fn offset_for(curve: &ResponseCurve, delta: f64) -> Result<usize> {
    let step = log_step(curve)?;
    Ok((delta / step).round().max(0.0) as usize)
}

pub fn delay_pairs(curve: &ResponseCurve, offset: usize) -> Result<DelayPairSet> {
    let step = log_step(curve)?;
    let n = curve.points.len();
    if offset >= n {
        return config(format!("offset {offset} leaves no pairs on a {n}-point curve"));
    }
    let pairs = (0..n - offset).map(|i| [curve.points[i].eta, curve.points[i + offset].eta]).collect();
    Ok(DelayPairSet { offset, delta: offset as f64 * step, pairs, source: (0..n - offset).collect() })
}

#[derive(Serialize, Deserialize)]
struct CurveRow {
    phi: f64,
    eta: f64,
    arclength: f64,
    u_center: f64,
}

/// CSV with header `phi,eta,arclength,u_center`.
pub fn write_curve_csv(curve: &ResponseCurve, w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for p in &curve.points {
        wr.serialize(CurveRow { phi: p.phi, eta: p.eta, arclength: p.arclength, u_center: p.u_center })?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_curve_csv(r: impl Read, beta: f64, gamma: f64) -> Result<ResponseCurve> {
    let mut rd = csv::Reader::from_reader(r);
    let mut points = Vec::new();
    for row in rd.deserialize() {
        let row: CurveRow = row?;
        points.push(CurvePoint { phi: row.phi, eta: row.eta, arclength: row.arclength, u_center: row.u_center });
    }
    Ok(ResponseCurve { beta, gamma, points, gaps: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn isothermal_closed_form() {
        assert!((isothermal_eta(1.0) - 0.93910).abs() < 1e-5);
        assert!((isothermal_eta(10.0) - 0.27).abs() < 1e-8);
        assert!((isothermal_eta(1e-8) - 1.0).abs() < 1e-15);
        // Series and closed form agree at the switch.
        let p: f64 = 1e-3;
        let direct = 3.0 * (p / p.tanh() - 1.0) / (p * p);
        assert!((isothermal_eta(p) - direct).abs() < 1e-9);
    }

    #[test]
    fn isothermal_profile_matches_sinh() {
        // u = u_c sinh(Φr)/(Φr) solves the isothermal equation.
        let phi: f64 = 1.0;
        let u_c = phi / phi.sinh();
        let p = solve_profile(PelletParams { phi, beta: 0.0, gamma: 20.0 }, u_c).unwrap();
        assert!((p.surface - 1.0).abs() < 1e-9);
        assert!(rel(p.eta, isothermal_eta(phi)) < 1e-8);
        let over = solve_profile(PelletParams { phi, beta: 0.0, gamma: 20.0 }, 1.0).unwrap();
        assert!(over.overshoots());
        assert!(solve_profile(PelletParams { phi, beta: 0.0, gamma: 20.0 }, 0.0).is_err());
    }

    #[test]
    fn shooting_recovers_isothermal_curve() {
        for phi in [0.5f64, 1.0, 2.0, 5.0, 10.0] {
            let (p, eta) = shoot(0.0, 20.0, phi / phi.sinh()).unwrap();
            assert!(rel(p, phi) < 1e-9, "{p} vs {phi}");
            assert!(rel(eta, isothermal_eta(phi)) < 1e-8);
        }
    }

    #[test]
    fn traced_isothermal_grid() {
        let grid = [0.5, 1.0, 2.0, 5.0, 10.0];
        let c = trace_curve(0.0, 20.0, &grid, &TraceOptions::default()).unwrap();
        assert!(c.gaps.is_empty());
        assert_eq!(c.len(), 5);
        for (pt, expected) in c.points.iter().zip([0.98372, 0.93911, 0.80597, 0.48005, 0.27000]) {
            assert!(rel(pt.eta, isothermal_eta(pt.phi)) < 1e-6);
            assert!((pt.eta - expected).abs() < 1e-4);
        }
        assert!(c.points.windows(2).all(|w| w[1].arclength > w[0].arclength && w[1].u_center < w[0].u_center));
    }

    #[test]
    fn delay_pairs_on_regular_grid() {
        let grid = log_grid(0.5, 5.0, 21).unwrap();
        let c = trace_curve(0.0, 20.0, &grid, &TraceOptions::default()).unwrap();
        let d0 = delay_pairs(&c, 0).unwrap();
        assert!(d0.pairs.iter().all(|p| p[0] == p[1]));
        let d = delay_pairs(&c, 3).unwrap();
        assert_eq!(d.pairs.len(), 18);
        assert!((d.delta - 3.0 * (10f64).ln() / 20.0).abs() < 1e-9);
        assert_eq!(offset_for(&c, d.delta).unwrap(), 3);
        assert!(delay_pairs(&c, 21).is_err());
        let mut irregular = c.clone();
        irregular.points[5].phi *= 1.01;
        assert!(delay_pairs(&irregular, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = trace_curve(0.0, 20.0, &[1.0, 2.0], &TraceOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("phi,eta,arclength,u_center\n"));
        let back = read_curve_csv(buf.as_slice(), 0.0, 20.0).unwrap();
        assert_eq!(back.points, c.points);
    }
}
