//! `A ⇌ B → C`: good sets around a reference in the QSSA regime collapse
//! onto level sets of `k_eff = k₁k₂/(k₁ + k₋₁ + k₂)`.

use rand::RngCore;

use super::{FigureId, FigureResult};
use crate::analysis::{dependence_score, DependenceMethod};
use crate::dmaps::{
    diffusion_map_with_rule, select_independent_coordinates, KernelFamily, PointCloud, ScaleRule, SelectOptions,
};
use crate::error::Result;
use crate::io::Table;
use crate::linalg::Matrix;
use crate::models::abc::{k_eff, k_eff_qssa};
use crate::models::{Abc, Model};
use crate::sampling::{filter_good, generate_dataset, sample_rng, Dimension, GoodSetSpec, SamplerSpec};

pub const THETA: [f64; 3] = [0.1, 1e3, 1e3];
pub const SAMPLES: usize = 3000;
pub const DELTA: f64 = 0.1;
/// Draws for the fine good set, taken in chunks of [`FINE_CHUNK`].
pub const FINE_SAMPLES: usize = 8_000_000;
pub const FINE_CHUNK: usize = 1_000_000;
pub const FINE_DELTA: f64 = 1e-3;

fn sampler(count: usize, seed: u64) -> SamplerSpec {
    SamplerSpec::new(vec![Dimension::log_uniform(1e-3, 1e3); 3], count, seed)
}

pub fn fig6(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Fig6, seed);
    let model = Model::Abc(Abc::for_reference(THETA)?);
    let spec = GoodSetSpec::from_reference(&model, &THETA, DELTA)?;

    // Coarse good set, output-only embedding.
    let good = filter_good(&generate_dataset(&model, &sampler(SAMPLES, seed))?, &spec)?;
    res.metric("good_points", good.len() as f64);
    let sp = diffusion_map_with_rule(&good.cloud()?, KernelFamily::OutputOnly, &ScaleRule::default(), 6)?;
    let phi1 = sp.psi(1);
    let (k1, km1, k2) = (good.inputs.column(0), good.inputs.column(1), good.inputs.column(2));
    let keff: Vec<f64> = (0..good.len()).map(|i| k_eff(k1[i], km1[i], k2[i])).collect();
    let keff_q: Vec<f64> = (0..good.len()).map(|i| k_eff_qssa(k1[i], km1[i], k2[i])).collect();
    res.metric("spearman_phi1_keff", dependence_score(&keff, &phi1, DependenceMethod::Spearman)?.score);
    res.metric("spearman_phi1_keff_qssa", dependence_score(&keff_q, &phi1, DependenceMethod::Spearman)?.score);
    res.table(
        "fig6",
        Table::from_columns(vec![
            ("k1", k1),
            ("k_1", km1),
            ("k2", k2),
            ("phi1", phi1),
            ("keff", keff),
            ("keff_qssa", keff_q),
        ])?,
    );

    // Fine good set: a thin shell around a 2-D surface; embed it in log inputs.
    let fine_spec = GoodSetSpec { delta: FINE_DELTA, ..spec.clone() };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for chunk in 0..FINE_SAMPLES.div_ceil(FINE_CHUNK) {
        let chunk_seed = sample_rng(seed, chunk as u64).next_u64();
        let kept = filter_good(&generate_dataset(&model, &sampler(FINE_CHUNK, chunk_seed))?, &fine_spec)?;
        rows.extend(kept.inputs.rows().map(|r| r.iter().map(|v| v.log10()).collect::<Vec<f64>>()));
    }
    res.metric("fine_good_points", rows.len() as f64);
    let logs = Matrix::from_rows(&rows)?;
    let sp = diffusion_map_with_rule(
        &PointCloud::from_inputs(logs.clone())?,
        KernelFamily::InputOnly,
        &ScaleRule::default(),
        10,
    )?;
    // Ask for one more than expected so that finding exactly two is informative.
    let sel = select_independent_coordinates(&sp, 3, SelectOptions::default())?;
    res.metric("fine_independent_coordinates", sel.indices.len() as f64);
    let mut t = Table::new(["log10_k1", "log10_k_1", "log10_k2", "phi_1", "phi_j"]);
    let second = sel.indices.get(1).map(|&j| sp.psi(j));
    for i in 0..logs.nrows() {
        let pj = second.as_ref().map_or(f64::NAN, |v| v[i]);
        t.push(vec![logs[(i, 0)], logs[(i, 1)], logs[(i, 2)], sp.eigenvectors[(i, 1)], pj])?;
    }
    res.table("fig6_fine", t);
    let mut s = Table::new(["index", "selection_score"]);
    for (c, sc) in sel.candidates.iter().zip(&sel.scores) {
        s.push(vec![*c as f64, *sc])?;
    }
    res.table("fig6_fine_selection", s);
    Ok(res)
}
