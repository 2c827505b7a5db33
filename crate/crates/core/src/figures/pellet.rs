//! Catalyst pellet: the non-monotone `η(Φ)` response and the kernels that
//! still parameterize it one-to-one.

use super::{bool_metric, FigureId, FigureResult};
use crate::analysis::{monotonicity_along, output_histogram};
use crate::dmaps::{
    diffusion_map, diffusion_map_with_rule, KernelFamily, KernelSpec, PointCloud, ScaleConvention, ScaleRule,
};
use crate::error::Result;
use crate::io::Table;
use crate::linalg::Matrix;
use crate::pellet::{delay_pairs, isothermal_eta, log_grid, offset_for, trace_curve, ResponseCurve, TraceOptions};
use crate::sampling::{sample_inputs, Dimension, SamplerSpec};

pub const BETA: f64 = 0.2;
pub const GAMMA: f64 = 20.0;
pub const GRID: (f64, f64, usize) = (0.9, 10.0, 1043);
pub const ISOTHERMAL_PHI: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];
/// Mixed-kernel bandwidth (converted as `s = 2ε`) and exponent.
pub const MIXED_EPSILON: f64 = 0.0125;
pub const MIXED_EXPONENT: f64 = 4.0;
/// Augmented-output bandwidth (converted as `s = ε²`) and delay in `ln Φ`.
pub const AUGMENTED_EPSILON: f64 = 0.01;
pub const DELAY: f64 = 0.05;
/// Uniform `Φ` sampling range of the output-density panel.
pub const HISTOGRAM_RANGE: (f64, f64) = (1e-3, 10.0);
pub const HISTOGRAM_SAMPLES: usize = 1_000_000;
pub const HISTOGRAM_BINS: usize = 400;

pub fn nonisothermal_curve() -> Result<ResponseCurve> {
    trace_curve(BETA, GAMMA, &log_grid(GRID.0, GRID.1, GRID.2)?, &TraceOptions::default())
}

/// Largest `ln Φ` separation between two curve points with equal `η`
/// (rising branch point versus the first falling point at or below it).
pub fn noninvertibility_span(curve: &ResponseCurve) -> f64 {
    let eta = curve.eta();
    let phi = curve.phi();
    let imax = (0..eta.len()).max_by(|&a, &b| eta[a].total_cmp(&eta[b])).unwrap_or(0);
    (0..imax)
        .filter_map(|i| (imax..eta.len()).find(|&j| eta[j] <= eta[i]).map(|j| (phi[j] / phi[i]).ln()))
        .fold(0.0, f64::max)
}

/// `η` at `Φ` by linear interpolation in `ln Φ` on a Φ-ordered curve.
fn interpolate(curve: &ResponseCurve, phi: f64) -> f64 {
    let p = &curve.points;
    let k = p.partition_point(|q| q.phi < phi).clamp(1, p.len() - 1);
    let (a, b) = (&p[k - 1], &p[k]);
    let w = (phi / a.phi).ln() / (b.phi / a.phi).ln();
    a.eta + w * (b.eta - a.eta)
}

pub fn fig7(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Fig7, seed);
    let iso = trace_curve(0.0, GAMMA, &ISOTHERMAL_PHI, &TraceOptions::default())?;
    let mut t = Table::new(["phi", "eta_shooting", "eta_closed_form"]);
    let mut worst = 0.0f64;
    for p in &iso.points {
        let exact = isothermal_eta(p.phi);
        worst = worst.max(((p.eta - exact) / exact).abs());
        t.push(vec![p.phi, p.eta, exact])?;
    }
    res.metric("isothermal_points", iso.len() as f64);
    res.metric("isothermal_max_rel_err", worst);
    res.table("fig7_isothermal", t);

    let curve = nonisothermal_curve()?;
    res.metric("curve_points", curve.len() as f64);
    res.metric("curve_gaps", curve.gaps.len() as f64);
    res.metric("max_eta", curve.eta().into_iter().fold(0.0, f64::max));
    res.metric("noninvertibility_span_ln_phi", noninvertibility_span(&curve));
    res.table(
        "fig7_curve",
        Table::from_columns(vec![("phi", curve.phi()), ("eta", curve.eta()), ("arclength", curve.arclength())])?,
    );

    // Output density under uniform sampling of Φ, interpolated on a dense curve.
    let (lo, hi) = HISTOGRAM_RANGE;
    let dense = trace_curve(BETA, GAMMA, &log_grid(lo, hi, 1500)?, &TraceOptions::default())?;
    let phis = sample_inputs(&SamplerSpec::new(vec![Dimension::uniform(lo, hi)], HISTOGRAM_SAMPLES, seed))?;
    let etas: Vec<f64> = phis.as_slice().iter().map(|&p| interpolate(&dense, p)).collect();
    let h = output_histogram(&etas, HISTOGRAM_BINS)?;
    res.metric("histogram_max_jump_factor", h.max_jump_factor());
    let centers: Vec<f64> = h.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    res.table("fig7_histogram", Table::from_columns(vec![("eta_center", centers), ("density", h.density.clone())])?);
    Ok(res)
}

pub fn fig8(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Fig8, seed);
    let curve = nonisothermal_curve()?;
    let (phi, eta, arc) = (curve.phi(), curve.eta(), curve.arclength());
    let cloud = PointCloud::from_parts(Matrix::column_vector(&phi), Some(Matrix::column_vector(&eta)))?;

    let plain = diffusion_map_with_rule(&cloud, KernelFamily::OutputOnly, &ScaleRule::default(), 4)?.psi(1);
    let mixed_spec = KernelSpec::mixed(ScaleConvention::Doubled.denominator(MIXED_EPSILON), MIXED_EXPONENT);
    let mixed = diffusion_map(&cloud, &mixed_spec, 4)?.psi(1);

    let offset = offset_for(&curve, DELAY)?;
    let pairs = delay_pairs(&curve, offset)?;
    let m = pairs.pairs.len();
    let paired = PointCloud::from_parts(
        Matrix::column_vector(&phi[..m]),
        Some(Matrix::from_fn(m, 2, |i, j| pairs.pairs[i][j])),
    )?;
    let aug_spec = KernelSpec::augmented_output(ScaleConvention::Squared.denominator(AUGMENTED_EPSILON), pairs.delta);
    let aug = diffusion_map(&paired, &aug_spec, 4)?.psi(1);

    let mono_plain = monotonicity_along(&plain, &arc)?;
    let mono_mixed = monotonicity_along(&mixed, &arc)?;
    let mono_aug = monotonicity_along(&aug, &arc[..m])?;
    res.metric("output_only_spearman", mono_plain.score);
    res.metric("mixed_spearman", mono_mixed.score);
    res.metric("mixed_monotone", bool_metric(mono_mixed.monotone));
    res.metric("augmented_spearman", mono_aug.score);
    res.metric("augmented_monotone", bool_metric(mono_aug.monotone));
    res.metric("delay_offset_steps", offset as f64);
    res.metric("delay_ln_phi", pairs.delta);

    let pad = |v: &[f64]| (0..phi.len()).map(|i| v.get(i).copied().unwrap_or(f64::NAN)).collect::<Vec<f64>>();
    let eta_next: Vec<f64> = pairs.pairs.iter().map(|p| p[1]).collect();
    res.table(
        "fig8",
        Table::from_columns(vec![
            ("phi", phi.clone()),
            ("eta", eta.clone()),
            ("arclength", arc.clone()),
            ("phi1", plain),
            ("phi1_mixed", mixed),
            ("eta_delayed", pad(&eta_next)),
            ("phi1_augmented", pad(&aug)),
        ])?,
    );
    Ok(res)
}
