//! Michaelis–Menten–Henri: κ is sloppy, σ is not, the quasi-steady regime
//! is `ε ≪ 1`, and in diffusion coordinates that regime is a neighbourhood
//! of the boundary traced by `ε → 0`.

use super::{FigureId, FigureResult};
use crate::analysis::{dependence_score, sloppiness_profile, DependenceMethod};
use crate::dmaps::{
    diffusion_map_with_rule, nystrom_extend, select_independent_coordinates, KernelFamily, ScaleRule, SelectOptions,
};
use crate::error::Result;
use crate::io::Table;
use crate::linalg::Matrix;
use crate::models::mmh::slaved_complex;
use crate::models::{mmh_reduced_response, Mmh, Model};
use crate::sampling::{evaluate_inputs, sample_inputs, Dimension, SamplerSpec};

pub const SWEEP_POINTS: usize = 21;
pub const REDUCED_EPS: f64 = 1e-4;
pub const REDUCED_SIGMAS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
pub const EMBED_POINTS: usize = 1500;
pub const EMBED_KAPPA: f64 = 10.0;
pub const BOUNDARY_POINTS: usize = 200;

fn log_sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect()
}

/// Euclidean distance from each `(x, y)` point to a polyline.
pub fn polyline_distance(x: &[f64], y: &[f64], curve: &[(f64, f64)]) -> Vec<f64> {
    let seg = |px: f64, py: f64, (ax, ay): (f64, f64), (bx, by): (f64, f64)| {
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let w = if len2 > 0.0 { (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
        (px - ax - w * dx).hypot(py - ay - w * dy)
    };
    x.iter()
        .zip(y)
        .map(|(&px, &py)| curve.windows(2).map(|w| seg(px, py, w[0], w[1])).fold(f64::INFINITY, f64::min))
        .collect()
}

pub fn mmh(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Mmh, seed);
    let model = Model::Mmh(Mmh::default());

    // Sloppiness of κ versus σ.
    let kappas = log_sweep(-2.0, 2.0, SWEEP_POINTS);
    let ks = sloppiness_profile(&model, &[0.01, 1.0, 1.0], 2, &kappas)?;
    let sigmas = log_sweep(-2.0, 2.0, SWEEP_POINTS);
    let ss = sloppiness_profile(&model, &[0.01, 1.0, 10.0], 1, &sigmas)?;
    res.metric("kappa_relative_range", ks.relative_range);
    res.metric("sigma_relative_range", ss.relative_range);
    let mut t = Table::new(["value", "kappa_sweep_norm", "sigma_sweep_norm"]);
    for ((&v, &kn), &sn) in kappas.iter().zip(&ks.norms).zip(&ss.norms) {
        t.push(vec![v, kn, sn])?;
    }
    res.table("mmh_sweeps", t);

    // Full model against the slaved reduced model.
    let times: Vec<f64> = (0..=28).map(|i| 0.1 + 0.05 * i as f64).collect();
    let full = Mmh { times: times.clone(), ..Mmh::default() };
    let mut worst = 0.0f64;
    let mut t = Table::new(["sigma", "t", "c_full", "c_reduced"]);
    for &sigma in &REDUCED_SIGMAS {
        let c = full.outputs(REDUCED_EPS, sigma, 1.0)?;
        let red = mmh_reduced_response(sigma, &times)?;
        let reduced: Vec<f64> = red.s.iter().map(|&s| slaved_complex(sigma, s)).collect();
        // Deviations are relative to the trajectory's peak: pointwise ratios
        // are meaningless once the substrate is exhausted and c ≈ 0.
        let peak = reduced.iter().copied().fold(0.0, f64::max);
        for (k, &tk) in times.iter().enumerate() {
            let cr = reduced[k];
            worst = worst.max((c[k] - cr).abs() / peak);
            t.push(vec![sigma, tk, c[k], cr])?;
        }
    }
    res.metric("reduced_max_rel_dev", worst);
    res.table("mmh_reduced", t);

    // Output-only embedding over (log ε, log σ) at fixed κ.
    let sampler = SamplerSpec::new(
        vec![Dimension::log_uniform(1e-3, 1.0), Dimension::log_uniform(1e-2, 1e2)],
        EMBED_POINTS,
        seed,
    );
    let plane = sample_inputs(&sampler)?;
    let inputs = Matrix::from_fn(plane.nrows(), 3, |i, j| if j < 2 { plane[(i, j)] } else { EMBED_KAPPA });
    let st = boundary_study(&inputs, sampler)?;
    res.metric("embed_failures", st.failures as f64);
    res.metric("second_coordinate_index", st.second_index as f64);
    res.metric("boundary_dependence_eps", st.dependence_eps);
    res.metric("boundary_dependence_eps_h", st.dependence_eps_h);
    res.metric("boundary_dependence_gap", st.dependence_eps - st.dependence_eps_h);
    let (log_eps, log_sigma, log_eps_h, phi1, phij, dist, boundary) =
        (st.log_eps, st.log_sigma, st.log_eps_h, st.phi1, st.phij, st.distance, st.boundary);
    res.table(
        "mmh_embedding",
        Table::from_columns(vec![
            ("log10_eps", log_eps),
            ("log10_sigma", log_sigma),
            ("log10_eps_h", log_eps_h),
            ("phi_1", phi1),
            ("phi_j", phij),
            ("boundary_distance", dist),
        ])?,
    );
    res.table(
        "mmh_boundary",
        Table::from_columns(vec![
            ("phi_1", boundary.iter().map(|b| b.0).collect()),
            ("phi_j", boundary.iter().map(|b| b.1).collect()),
        ])?,
    );
    Ok(res)
}

/// Output-only embedding of MMH responses and the distance of every point
/// from the Nyström image of the `ε → 0` boundary.
#[derive(Clone, Debug)]
pub struct BoundaryStudy {
    pub failures: usize,
    pub second_index: usize,
    pub log_eps: Vec<f64>,
    pub log_sigma: Vec<f64>,
    pub log_eps_h: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phij: Vec<f64>,
    pub boundary: Vec<(f64, f64)>,
    pub distance: Vec<f64>,
    pub dependence_eps: f64,
    pub dependence_eps_h: f64,
}

/// Runs the boundary study on `(ε, σ, κ)` rows.
pub fn boundary_study(inputs: &Matrix, sampler: SamplerSpec) -> Result<BoundaryStudy> {
    let model = Model::Mmh(Mmh::default());
    let d = evaluate_inputs(&model, inputs, sampler)?;
    let sp = diffusion_map_with_rule(&d.cloud()?, KernelFamily::OutputOnly, &ScaleRule::default(), 12)?;
    let sel = select_independent_coordinates(&sp, 2, SelectOptions::default())?;
    let j = *sel.indices.get(1).ok_or_else(|| crate::Error::Numeric("no second independent coordinate".into()))?;
    let (phi1, phij) = (sp.psi(1), sp.psi(j));
    let log_eps: Vec<f64> = d.inputs.column(0).iter().map(|v| v.log10()).collect();
    let log_sigma: Vec<f64> = d.inputs.column(1).iter().map(|v| v.log10()).collect();
    let log_eps_h: Vec<f64> = log_eps.iter().zip(&log_sigma).map(|(e, s)| e + (1.0 + 10f64.powf(-s)).log10()).collect();
    let (lo, hi) = log_sigma.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let times = Mmh::default().times;
    let boundary = log_sweep(lo, hi, BOUNDARY_POINTS)
        .into_iter()
        .map(|sigma| {
            let c = mmh_reduced_response(sigma, &times)?.c;
            let v = nystrom_extend(&sp, None, Some(&c), &[1, j])?;
            Ok((v[0], v[1]))
        })
        .collect::<Result<Vec<_>>>()?;
    let distance = polyline_distance(&phi1, &phij, &boundary);
    // Distances span several decades; neighbourhoods are compared in log scale.
    let log_dist: Vec<f64> = distance.iter().map(|d| d.max(1e-15).log10()).collect();
    let dependence_eps = dependence_score(&log_eps, &log_dist, DependenceMethod::Binned)?.score;
    let dependence_eps_h = dependence_score(&log_eps_h, &log_dist, DependenceMethod::Binned)?.score;
    Ok(BoundaryStudy {
        failures: d.manifest.failures,
        second_index: j,
        log_eps,
        log_sigma,
        log_eps_h,
        phi1,
        phij,
        boundary,
        distance,
        dependence_eps,
        dependence_eps_h,
    })
}
