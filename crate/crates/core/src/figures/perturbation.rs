//! Singular versus regular perturbation: Jacobian singular values, memory
//! loss of the fast initial condition, and the regular limit `x₀e^{-t}`.

use super::{named, FigureId, FigureResult};
use crate::analysis::{dependence_score, DependenceMethod};
use crate::dmaps::{
    diffusion_map, diffusion_map_with_rule, select_independent_coordinates, KernelFamily, KernelSpec, ScaleConvention,
    ScaleRule, SelectOptions,
};
use crate::error::Result;
use crate::geometry::{jacobian, sensitivity_summary, JacobianMethod, RANK_THRESHOLD};
use crate::io::Table;
use crate::models::{Model, Regpert, Singpert};
use crate::sampling::{generate_dataset, Dimension, SamplerSpec};

pub const SVALS_EPS: [f64; 6] = [0.3, 0.1, 0.03, 0.01, 0.003, 0.001];
pub const SVALS_Y0: f64 = 4.0;
pub const SINGPERT_POINTS: usize = 2000;
pub const REGPERT_POINTS: usize = 2500;
/// Kernel bandwidth of the regular-perturbation embedding (doubled convention, `s = 2ε`).
pub const REGPERT_EPSILON: f64 = 5.0;
/// Upper end of the `log₁₀ ε` slice treated as the small-ε regime.
pub const SMALL_EPS_SLICE: f64 = -2.5;

pub fn svals(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Svals, seed);
    let model = Model::Singpert(Singpert::default());
    let mut t = Table::new(["eps", "sigma_1", "sigma_2", "ratio"]);
    let mut ratios = Vec::new();
    for &eps in &SVALS_EPS {
        let j = jacobian(&model, &[eps, SVALS_Y0], JacobianMethod::Analytic)?;
        let s = sensitivity_summary(&j, RANK_THRESHOLD)?;
        let ratio = s.singular_values[1] / s.singular_values[0];
        t.push(vec![eps, s.singular_values[0], s.singular_values[1], ratio])?;
        ratios.push(ratio);
    }
    res.metric("strictly_decreasing", super::bool_metric(ratios.windows(2).all(|w| w[1] < w[0])));
    res.metric("ratio_at_smallest_eps", *ratios.last().expect("nonempty sweep"));
    res.table("svals", t);
    Ok(res)
}

/// Largest component-wise relative spread of the rows of `f`.
fn relative_spread(rows: &[Vec<f64>]) -> f64 {
    let n = rows[0].len();
    (0..n)
        .map(|k| {
            let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            (hi - lo) / mean.abs()
        })
        .fold(0.0, f64::max)
}

pub fn fig2_4(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Fig2To4, seed);
    let model = Model::Singpert(Singpert::default());

    let y0s: Vec<f64> = (0..=40).map(|i| 3.0 + 2.0 * i as f64 / 40.0).collect();
    let rows = y0s.iter().map(|&y0| model.evaluate(&[1e-3, y0])).collect::<Result<Vec<_>>>()?;
    res.metric("memory_spread_eps_1e-3", relative_spread(&rows));
    let mut cols = vec![("y0".to_string(), y0s)];
    cols.extend(named("f_", (0..3).map(|k| rows.iter().map(|r| r[k]).collect()).collect(), 1));
    res.table("fig2_memory", Table::from_columns(cols)?);

    let sampler =
        SamplerSpec::new(vec![Dimension::log_uniform(1e-3, 1.0), Dimension::uniform(3.0, 5.0)], SINGPERT_POINTS, seed);
    let d = generate_dataset(&model, &sampler)?;
    let sp = diffusion_map_with_rule(&d.cloud()?, KernelFamily::OutputOnly, &ScaleRule::default(), 12)?;
    let sel = select_independent_coordinates(&sp, 2, SelectOptions::default())?;
    res.metric("coordinates_found", sel.indices.len() as f64);
    let mut cols = vec![("eps".to_string(), d.inputs.column(0)), ("y0".to_string(), d.inputs.column(1))];
    cols.extend(named("f_", super::columns(&d.outputs), 1));
    cols.push(("phi_1".into(), sp.psi(1)));
    if let Some(&j) = sel.indices.get(1) {
        res.metric("second_coordinate_index", j as f64);
        cols.push(("phi_j".into(), sp.psi(j)));
    }
    res.table("fig3_embedding", Table::from_columns(cols)?);
    Ok(res)
}

pub fn fig5(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Fig5, seed);
    let reg = Regpert::default();
    let model = Model::Regpert(reg.clone());

    // Regular limit: x(t) → x₀e^{-t} at every monitoring time.
    let mut worst = 0.0f64;
    let mut lim = Table::new(["x0", "f_1", "f_2", "f_3", "limit_1", "limit_2", "limit_3"]);
    for i in 0..=30 {
        let x0 = 1.0 + 1.5 * i as f64 / 30.0;
        let f = model.evaluate(&[1e-3, x0])?;
        let limit: Vec<f64> = reg.times.iter().map(|t| x0 * (-t).exp()).collect();
        for (a, b) in f.iter().zip(&limit) {
            worst = worst.max(((a - b) / b).abs());
        }
        lim.push([vec![x0], f, limit].concat())?;
    }
    res.metric("max_rel_dev_from_limit_eps_1e-3", worst);
    res.table("fig5_limit", lim);

    let sampler =
        SamplerSpec::new(vec![Dimension::log_uniform(1e-3, 1e-1), Dimension::uniform(1.0, 2.5)], REGPERT_POINTS, seed);
    let d = generate_dataset(&model, &sampler)?;
    let spec = KernelSpec::output_only(ScaleConvention::Doubled.denominator(REGPERT_EPSILON));
    let sp = diffusion_map(&d.cloud()?, &spec, 6)?;
    let phi1 = sp.psi(1);
    let eps = d.inputs.column(0);
    let x0 = d.inputs.column(1);
    let slice: Vec<usize> = (0..d.len()).filter(|&i| eps[i].log10() <= SMALL_EPS_SLICE).collect();
    let pick = |v: &[f64]| slice.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    res.metric("slice_points", slice.len() as f64);
    res.metric(
        "spearman_phi1_x0_small_eps",
        dependence_score(&pick(&x0), &pick(&phi1), DependenceMethod::Spearman)?.score,
    );
    res.metric("spearman_phi1_x0_all", dependence_score(&x0, &phi1, DependenceMethod::Spearman)?.score);
    let mut cols = vec![("eps".to_string(), eps), ("x0".to_string(), x0)];
    cols.extend(named("f_", super::columns(&d.outputs), 1));
    cols.push(("phi_1".into(), phi1));
    res.table("fig5_embedding", Table::from_columns(cols)?);
    Ok(res)
}
