//! Adaptive initial-value integrators with dense output.
//!
//! * [`Method::Dopri5`] — explicit Dormand–Prince 5(4) for nonstiff fields.
//! * [`Method::TrBdf2`] — L-stable, one-step implicit TR-BDF2 with an
//!   embedded third-order error estimate, for stiff fields.
//!
//! Both return a [`Trajectory`] that interpolates between accepted steps by
//! cubic Hermite polynomials.

use serde::{Deserialize, Serialize};

use crate::error::{config, numeric, Result};
use crate::linalg::{solve, Matrix};

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
    /// Analytic Jacobian `∂f/∂y`; return `false` to fall back to finite differences.
    fn jacobian(&self, _t: f64, _y: &[f64], _jac: &mut Matrix) -> bool {
        false
    }
}

/// A system given by closures.
pub struct FnSystem<F, J = fn(f64, &[f64], &mut Matrix) -> bool> {
    dim: usize,
    f: F,
    jac: Option<J>,
}

impl<F: Fn(f64, &[f64], &mut [f64])> FnSystem<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, jac: None }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64]), J: Fn(f64, &[f64], &mut Matrix) -> bool> FnSystem<F, J> {
    pub fn with_jacobian(dim: usize, f: F, jac: J) -> Self {
        Self { dim, f, jac: Some(jac) }
    }
}

impl<F: Fn(f64, &[f64], &mut [f64]), J: Fn(f64, &[f64], &mut Matrix) -> bool> OdeSystem for FnSystem<F, J> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.f)(t, y, dy)
    }
    fn jacobian(&self, t: f64, y: &[f64], jac: &mut Matrix) -> bool {
        self.jac.as_ref().is_some_and(|j| j(t, y, jac))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dopri5,
    TrBdf2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IvpOptions {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when absent.
    pub first_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            method: Method::Dopri5,
            rtol: 1e-8,
            atol: 1e-10,
            first_step: None,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl IvpOptions {
    pub fn stiff() -> Self {
        Self { method: Method::TrBdf2, ..Self::default() }
    }

    pub fn tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return config(format!("tolerances must be positive (rtol = {}, atol = {})", self.rtol, self.atol));
        }
        if !(self.max_step > 0.0) {
            return config("max_step must be positive");
        }
        Ok(())
    }
}

/// Accepted steps with states and slopes, interpolated by cubic Hermite.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub dy: Vec<Vec<f64>>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("trajectory has at least one point")
    }

    pub fn last(&self) -> &[f64] {
        self.y.last().expect("trajectory has at least one point")
    }

    pub fn steps(&self) -> usize {
        self.t.len() - 1
    }

    /// State at time `t` (clamped to the integrated span).
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let n = self.t.len();
        if n == 1 || t <= self.t[0] {
            return self.y[0].clone();
        }
        if t >= self.t[n - 1] {
            return self.y[n - 1].clone();
        }
        let k = self.t.partition_point(|&s| s <= t).clamp(1, n - 1) - 1;
        hermite(self.t[k], self.t[k + 1], &self.y[k], &self.y[k + 1], &self.dy[k], &self.dy[k + 1], t)
    }
}

fn hermite(t0: f64, t1: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..y0.len()).map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]).collect()
}

/// Why integration stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    /// Reached the end of the requested span.
    Completed,
    /// The event function changed sign; integration stopped at its root.
    Event { t: f64, y: Vec<f64> },
}

/// Integrates over `t_span` and returns the dense trajectory.
pub fn integrate_ivp(sys: &impl OdeSystem, t_span: (f64, f64), y0: &[f64], opts: &IvpOptions) -> Result<Trajectory> {
    integrate_with_event(sys, t_span, y0, opts, None::<fn(f64, &[f64]) -> f64>).map(|(tr, _)| tr)
}

/// Integrates until `t_span.1` or until `event(t, y)` changes sign, whichever
/// comes first. The event root is located on the dense output and polished
/// by re-stepping from the last accepted point, so the returned state is as
/// accurate as an ordinary step.
pub fn integrate_with_event<E: Fn(f64, &[f64]) -> f64>(
    sys: &impl OdeSystem,
    t_span: (f64, f64),
    y0: &[f64],
    opts: &IvpOptions,
    event: Option<E>,
) -> Result<(Trajectory, Termination)> {
    integrate_inner(sys, t_span, y0, opts, event, &[])
}

/// States at `times` (increasing, after `t0`). Steps are clipped to land on
/// every requested time, so outputs carry full step accuracy rather than
/// interpolation error.
pub fn integrate_to_times(
    sys: &impl OdeSystem,
    t0: f64,
    y0: &[f64],
    times: &[f64],
    opts: &IvpOptions,
) -> Result<Vec<Vec<f64>>> {
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if times[0] <= t0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return config("output times must be strictly increasing and after the initial time");
    }
    let t1 = *times.last().unwrap();
    let tr = integrate_inner(sys, (t0, t1), y0, opts, None::<fn(f64, &[f64]) -> f64>, times)?.0;
    Ok(times
        .iter()
        .map(|&s| {
            let k = tr.t.partition_point(|&u| u < s);
            if k < tr.t.len() && tr.t[k] == s {
                tr.y[k].clone()
            } else {
                tr.sample(s)
            }
        })
        .collect())
}

fn integrate_inner<E: Fn(f64, &[f64]) -> f64>(
    sys: &impl OdeSystem,
    t_span: (f64, f64),
    y0: &[f64],
    opts: &IvpOptions,
    event: Option<E>,
    stops: &[f64],
) -> Result<(Trajectory, Termination)> {
    opts.validate()?;
    let n = sys.dim();
    if y0.len() != n {
        return config(format!("initial state has length {} but the system has dimension {n}", y0.len()));
    }
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return config(format!("time span must be increasing, got ({t0}, {t1})"));
    }
    let mut stepper = Stepper::new(sys, *opts);
    let mut f0 = vec![0.0; n];
    sys.rhs(t0, y0, &mut f0);
    if f0.iter().any(|v| !v.is_finite()) {
        return numeric(format!("non-finite derivative at t = {t0}"));
    }
    let mut tr = Trajectory { t: vec![t0], y: vec![y0.to_vec()], dy: vec![f0.clone()], rejected: 0 };
    let span = t1 - t0;
    let mut h = opts.first_step.unwrap_or_else(|| initial_step(sys, t0, y0, &f0, opts)).min(span).min(opts.max_step);
    let mut g_prev = event.as_ref().map(|e| e(t0, y0));
    let (mut t, mut y, mut f) = (t0, y0.to_vec(), f0);
    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok((tr, Termination::Completed));
        }
        let h_min = 64.0 * f64::EPSILON * t.abs().max(span.abs()).max(1e-300);
        if h < h_min {
            return numeric(format!("step size underflow at t = {t:.17e} (h = {h:.3e}); last state {y:?}"));
        }
        let last = t + h >= t1 - 1e-12 * span;
        let stop = stops.iter().copied().find(|&s| s > t && s < t1);
        let (h_try, clipped) = match stop {
            Some(s) if t + h >= s - 1e-12 * span => (s - t, Some(s)),
            _ if last => (t1 - t, None),
            _ => (h, None),
        };
        let last = last && clipped.is_none();
        match stepper.step(t, &y, &f, h_try)? {
            StepResult::Accepted { y_new, f_new, h_next } => {
                let t_new = if last { t1 } else { clipped.unwrap_or(t + h_try) };
                if let (Some(ev), Some(gp)) = (event.as_ref(), g_prev) {
                    let g_new = ev(t_new, &y_new);
                    if gp != 0.0 && g_new.signum() != gp.signum() || g_new == 0.0 {
                        let (te, ye) = locate_event(&mut stepper, ev, t, &y, &f, t_new, &y_new, &f_new)?;
                        let mut fe = vec![0.0; n];
                        sys.rhs(te, &ye, &mut fe);
                        tr.t.push(te);
                        tr.y.push(ye.clone());
                        tr.dy.push(fe);
                        return Ok((tr, Termination::Event { t: te, y: ye }));
                    }
                    g_prev = Some(g_new);
                }
                t = t_new;
                y = y_new;
                f = f_new;
                tr.t.push(t);
                tr.y.push(y.clone());
                tr.dy.push(f.clone());
                h = h_next.min(opts.max_step);
            }
            StepResult::Rejected { h_next } => {
                tr.rejected += 1;
                h = h_next;
            }
        }
    }
    numeric(format!("maximum number of steps ({}) reached at t = {t}; last state {y:?}", opts.max_steps))
}

#[allow(clippy::too_many_arguments)]
fn locate_event<S: OdeSystem, E: Fn(f64, &[f64]) -> f64>(
    stepper: &mut Stepper<'_, S>,
    ev: &E,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    t1: f64,
    y1: &[f64],
    f1: &[f64],
) -> Result<(f64, Vec<f64>)> {
    // Bracketed bisection on the Hermite interpolant.
    let g0 = ev(t0, y0);
    let (mut a, mut b) = (t0, t1);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = ev(m, &hermite(t0, t1, y0, y1, f0, f1, m));
        if gm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if gm.signum() == g0.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    // Polish with secant iterations on exact single steps from t0.
    let mut te = 0.5 * (a + b);
    let mut ye = stepper.single(t0, y0, f0, te - t0)?;
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..8 {
        let g = ev(te, &ye);
        if g == 0.0 {
            break;
        }
        let next = match prev {
            Some((tp, gp)) if g != gp => te - g * (te - tp) / (g - gp),
            _ => break,
        };
        prev = Some((te, g));
        if !(next > t0 && next <= t1) || (next - te).abs() <= 4.0 * f64::EPSILON * te.abs().max(1.0) {
            break;
        }
        te = next;
        ye = stepper.single(t0, y0, f0, te - t0)?;
    }
    if prev.is_none() {
        // One secant step needs two samples; take a second one near the first.
        let g = ev(te, &ye);
        let dt = (t1 - t0) * 1e-4;
        let t2 = (te - dt).max(t0 + dt * 0.5);
        let y2 = stepper.single(t0, y0, f0, t2 - t0)?;
        let g2 = ev(t2, &y2);
        if g != g2 {
            let next = te - g * (te - t2) / (g - g2);
            if next > t0 && next <= t1 {
                let yn = stepper.single(t0, y0, f0, next - t0)?;
                if ev(next, &yn).abs() < g.abs() {
                    te = next;
                    ye = yn;
                }
            }
        }
    }
    Ok((te, ye))
}

fn initial_step(sys: &impl OdeSystem, t0: f64, y0: &[f64], f0: &[f64], opts: &IvpOptions) -> f64 {
    let sc: Vec<f64> = y0.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let d0 = rms(y0, &sc);
    let d1 = rms(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    sys.rhs(t0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff, &sc) / h0;
    let order = match opts.method {
        Method::Dopri5 => 5.0,
        Method::TrBdf2 => 3.0,
    };
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / order) };
    (100.0 * h0).min(h1)
}

fn rms(v: &[f64], scale: &[f64]) -> f64 {
    (v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

enum StepResult {
    Accepted { y_new: Vec<f64>, f_new: Vec<f64>, h_next: f64 },
    Rejected { h_next: f64 },
}

struct Stepper<'a, S: OdeSystem> {
    sys: &'a S,
    opts: IvpOptions,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

impl<'a, S: OdeSystem> Stepper<'a, S> {
    fn new(sys: &'a S, opts: IvpOptions) -> Self {
        Self { sys, opts }
    }

    fn err_norm(&self, e: &[f64], y0: &[f64], y1: &[f64]) -> f64 {
        let sc: Vec<f64> =
            y0.iter().zip(y1).map(|(a, b)| self.opts.atol + self.opts.rtol * a.abs().max(b.abs())).collect();
        rms(e, &sc)
    }

    fn step(&mut self, t: f64, y: &[f64], f: &[f64], h: f64) -> Result<StepResult> {
        match self.opts.method {
            Method::Dopri5 => Ok(self.dopri_step(t, y, f, h)),
            Method::TrBdf2 => self.trbdf2_step(t, y, f, h),
        }
    }

    /// One step of size `h` with no error control (used to polish event roots).
    fn single(&mut self, t: f64, y: &[f64], f: &[f64], h: f64) -> Result<Vec<f64>> {
        if h <= 0.0 {
            return Ok(y.to_vec());
        }
        match self.opts.method {
            Method::Dopri5 => Ok(self.dopri_raw(t, y, f, h).0),
            Method::TrBdf2 => self.trbdf2_raw(t, y, f, h).map(|r| r.0).ok_or_else(|| {
                crate::Error::Numeric(format!("Newton iteration failed while locating an event near t = {t}"))
            }),
        }
    }

    fn dopri_raw(&self, t: f64, y: &[f64], f: &[f64], h: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = y.len();
        let mut k: Vec<Vec<f64>> = vec![f.to_vec()];
        let mut tmp = vec![0.0; n];
        for s in 1..7 {
            for i in 0..n {
                tmp[i] = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            let mut ks = vec![0.0; n];
            self.sys.rhs(t + C[s] * h, &tmp, &mut ks);
            k.push(ks);
        }
        // Stage 7 is evaluated at the 5th-order solution (FSAL).
        let y5 = tmp;
        let err: Vec<f64> = (0..n).map(|i| h * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>()).collect();
        (y5, k.pop().unwrap(), err)
    }

    fn dopri_step(&self, t: f64, y: &[f64], f: &[f64], h: f64) -> StepResult {
        let (y5, f5, err) = self.dopri_raw(t, y, f, h);
        let en = self.err_norm(&err, y, &y5);
        if !en.is_finite() || y5.iter().chain(&f5).any(|v| !v.is_finite()) {
            return StepResult::Rejected { h_next: 0.25 * h };
        }
        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        if en <= 1.0 {
            StepResult::Accepted { y_new: y5, f_new: f5, h_next: h * fac }
        } else {
            StepResult::Rejected { h_next: h * fac.min(0.9) }
        }
    }

    fn jacobian(&self, t: f64, y: &[f64], f: &[f64]) -> Matrix {
        let n = y.len();
        let mut j = Matrix::zeros(n, n);
        if self.sys.jacobian(t, y, &mut j) {
            return j;
        }
        let mut yp = y.to_vec();
        let mut fp = vec![0.0; n];
        for c in 0..n {
            let d = 1e-8 * y[c].abs().max(1e-5);
            yp[c] = y[c] + d;
            self.sys.rhs(t, &yp, &mut fp);
            for r in 0..n {
                j[(r, c)] = (fp[r] - f[r]) / d;
            }
            yp[c] = y[c];
        }
        j
    }

    /// Solves `x - c·h·f(t, x) = rhs` by simplified Newton with iteration matrix `I - c h J`.
    fn newton(&self, t: f64, rhs: &[f64], guess: Vec<f64>, ch: f64, iter_mat: &Matrix) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = rhs.len();
        let mut x = guess;
        let mut fx = vec![0.0; n];
        let mut prev_norm = f64::INFINITY;
        for it in 0..12 {
            self.sys.rhs(t, &x, &mut fx);
            let res: Vec<f64> = (0..n).map(|i| rhs[i] + ch * fx[i] - x[i]).collect();
            let dx = solve(iter_mat, &res).ok()?;
            for i in 0..n {
                x[i] += dx[i];
            }
            if x.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let sc: Vec<f64> = x.iter().map(|v| self.opts.atol + self.opts.rtol * v.abs()).collect();
            let nrm = rms(&dx, &sc);
            if nrm < 1e-2 || (it > 0 && nrm < 1e-1 && nrm < 0.2 * prev_norm) {
                self.sys.rhs(t, &x, &mut fx);
                return Some((x, fx));
            }
            if it > 1 && nrm > prev_norm {
                return None;
            }
            prev_norm = nrm;
        }
        None
    }

    /// TR-BDF2 step: returns `(y_new, f_new, filtered_error)`.
    fn trbdf2_raw(&self, t: f64, y: &[f64], f: &[f64], h: f64) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = y.len();
        let sqrt2 = std::f64::consts::SQRT_2;
        let gamma = 2.0 - sqrt2;
        let d = gamma / 2.0;
        let w = sqrt2 / 4.0;
        let jac = self.jacobian(t, y, f);
        let iter_mat = Matrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - d * h * jac[(i, j)]);
        // Trapezoidal stage to t + γh.
        let rhs1: Vec<f64> = (0..n).map(|i| y[i] + d * h * f[i]).collect();
        let guess1: Vec<f64> = (0..n).map(|i| y[i] + gamma * h * f[i]).collect();
        let (z, fz) = self.newton(t + gamma * h, &rhs1, guess1, d * h, &iter_mat)?;
        // BDF2 stage to t + h.
        let a_z = (sqrt2 + 1.0) / 2.0;
        let a_y = (sqrt2 - 1.0) / 2.0;
        let rhs2: Vec<f64> = (0..n).map(|i| a_z * z[i] - a_y * y[i]).collect();
        let guess2: Vec<f64> = (0..n).map(|i| y[i] + h * fz[i]).collect();
        let (y1, f1) = self.newton(t + h, &rhs2, guess2, d * h, &iter_mat)?;
        let (b0, bg, b1) = ((1.0 - w) / 3.0, (3.0 * w + 1.0) / 3.0, d / 3.0);
        let est: Vec<f64> = (0..n).map(|i| h * (b0 * f[i] + bg * fz[i] + b1 * f1[i]) - (y1[i] - y[i])).collect();
        // Filtering by (I - d h J)⁻¹ keeps the estimate bounded for stiff components.
        let err = solve(&iter_mat, &est).ok()?;
        Some((y1, f1, err))
    }

    fn trbdf2_step(&self, t: f64, y: &[f64], f: &[f64], h: f64) -> Result<StepResult> {
        let Some((y1, f1, err)) = self.trbdf2_raw(t, y, f, h) else {
            return Ok(StepResult::Rejected { h_next: 0.25 * h });
        };
        let en = self.err_norm(&err, y, &y1);
        if !en.is_finite() {
            return Ok(StepResult::Rejected { h_next: 0.25 * h });
        }
        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-1.0 / 3.0)).clamp(0.2, 5.0) };
        Ok(if en <= 1.0 {
            StepResult::Accepted { y_new: y1, f_new: f1, h_next: h * fac }
        } else {
            StepResult::Rejected { h_next: h * fac.min(0.9) }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> FnSystem<impl Fn(f64, &[f64], &mut [f64])> {
        FnSystem::new(1, |_, y, dy| dy[0] = -y[0])
    }

    #[test]
    fn scalar_decay_both_methods() {
        // The second-order stiff method needs a tighter tolerance for the same global error.
        for opts in [IvpOptions::default(), IvpOptions::stiff().tolerances(1e-10, 1e-12)] {
            let tr = integrate_ivp(&decay(), (0.0, 1.0), &[1.0], &opts).unwrap();
            let err = (tr.last()[0] - (-1.0f64).exp()).abs();
            assert!(err < 1e-7, "{:?}: {err:e}", opts.method);
            assert!((tr.sample(0.5)[0] - (-0.5f64).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn output_times_are_step_endpoints() {
        let times = [0.1, 0.25, 0.7, 1.0];
        let ys = integrate_to_times(&decay(), 0.0, &[1.0], &times, &IvpOptions::default()).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-9, "{t}");
        }
        assert!(integrate_to_times(&decay(), 0.0, &[1.0], &[0.5, 0.2], &IvpOptions::default()).is_err());
    }

    #[test]
    fn stiff_linear_system() {
        // y1' = -1000 (y1 - cos t), exact slow manifold y1 ≈ cos t.
        let sys = FnSystem::new(1, |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -1000.0 * (y[0] - t.cos()));
        let tr = integrate_ivp(&sys, (0.0, 2.0), &[0.0], &IvpOptions::stiff().tolerances(1e-6, 1e-9)).unwrap();
        // y = cos t + sin t /1000 to leading order
        let exact = 2.0f64.cos() + 2.0f64.sin() / 1000.0;
        assert!((tr.last()[0] - exact).abs() < 1e-5);
        assert!(tr.steps() < 2000, "stiff solver took {} steps", tr.steps());
    }

    #[test]
    fn event_stops_at_root() {
        let sys = FnSystem::new(1, |_, _y: &[f64], dy: &mut [f64]| dy[0] = 1.0);
        let (tr, term) = integrate_with_event(
            &sys,
            (0.0, 10.0),
            &[0.0],
            &IvpOptions::default(),
            Some(|_t: f64, y: &[f64]| y[0] - 2.5),
        )
        .unwrap();
        match term {
            Termination::Event { t, y } => {
                assert!((t - 2.5).abs() < 1e-10 && (y[0] - 2.5).abs() < 1e-10);
            }
            other => panic!("{other:?}"),
        }
        assert!((tr.t_end() - 2.5).abs() < 1e-10);
    }

    #[test]
    fn underflow_reports_last_state() {
        // Finite-time blow-up at t = 1.
        let sys = FnSystem::new(1, |_, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0]);
        let err = integrate_ivp(&sys, (0.0, 2.0), &[1.0], &IvpOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("last state"), "{msg}");
    }

    #[test]
    fn rejects_bad_tolerances() {
        let opts = IvpOptions { rtol: 0.0, ..Default::default() };
        assert!(integrate_ivp(&decay(), (0.0, 1.0), &[1.0], &opts).is_err());
    }
}
