//! Eigenfunctions of a uniformly sampled rectangle against the Neumann
//! Laplacian modes `cos(kπx/L) cos(lπy/ℓ)`.

use std::f64::consts::PI;

use super::{FigureId, FigureResult};
use crate::analysis::pearson;
use crate::dmaps::{
    diffusion_map, formula_scale, select_independent_coordinates, KernelSpec, PointCloud, ScaleConvention,
    SelectOptions,
};
use crate::error::Result;
use crate::io::Table;
use crate::sampling::{sample_inputs, Dimension, SamplerSpec};

pub const POINTS: usize = 2000;
pub const WIDTH: f64 = 1.0;
pub const HEIGHT: f64 = 0.5;

pub fn rect(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Rect, seed);
    let x = sample_inputs(&SamplerSpec::new(
        vec![Dimension::uniform(0.0, WIDTH), Dimension::uniform(0.0, HEIGHT)],
        POINTS,
        seed,
    ))?;
    let eps = formula_scale(POINTS, 2, 1.0)?;
    let cloud = PointCloud::from_inputs(x.clone())?;
    let sp = diffusion_map(&cloud, &KernelSpec::input_only(ScaleConvention::Doubled.denominator(eps)), 10)?;
    let sel = select_independent_coordinates(&sp, 2, SelectOptions::default())?;

    let (px, py) = (x.column(0), x.column(1));
    let cos_x: Vec<f64> = px.iter().map(|v| (PI * v / WIDTH).cos()).collect();
    let cos_y: Vec<f64> = py.iter().map(|v| (PI * v / HEIGHT).cos()).collect();
    let psi1 = sp.psi(1);
    res.metric("epsilon", eps);
    res.metric("corr_psi1_cos_x", pearson(&psi1, &cos_x).abs());
    // Laplacian eigenvalues (kπ/L)² + (lπ/ℓ)²: mode (0,1) over mode (1,0).
    res.metric("analytic_ratio_01_10", (WIDTH / HEIGHT).powi(2));
    res.metric("coordinates_found", sel.indices.len() as f64);
    let mut cols = vec![("x", px), ("y", py), ("psi_1", psi1.clone()), ("cos_pi_x", cos_x)];
    if let Some(&j) = sel.indices.get(1) {
        let psi_j = sp.psi(j);
        res.metric("nonharmonic_index", j as f64);
        res.metric("corr_psij_cos_y", pearson(&psi_j, &cos_y).abs());
        res.metric("eigenvalue_ratio", sp.eigenvalues[j] / sp.eigenvalues[1]);
        cols.push(("psi_j", psi_j));
    } else {
        res.metric("corr_psij_cos_y", 0.0);
    }
    cols.push(("cos_pi_y_l", cos_y));
    res.table("rect", Table::from_columns(cols)?);

    let mut spec = Table::new(["index", "eigenvalue", "selection_score"]);
    for k in 1..sp.eigenvalues.len() {
        let score = sel.candidates.iter().position(|&c| c == k).map_or(f64::NAN, |i| sel.scores[i]);
        spec.push(vec![k as f64, sp.eigenvalues[k], score])?;
    }
    res.table("rect_spectrum", spec);
    Ok(res)
}
