//! Good set of a slow–fast model whose parameters are disguised by two
//! Hénon iterations. Input-only diffusion maps see a thin curve; adding the
//! outputs to the kernel recovers both hidden parameters.

use super::{FigureId, FigureResult};
use crate::analysis::{dependence_score, DependenceMethod};
use crate::dmaps::{
    diffusion_map, diffusion_map_with_rule, median_sq_distance, pairwise_dissimilarity, select_independent_coordinates,
    KernelFamily, KernelSpec, PointCloud, ScaleRule, SelectOptions,
};
use crate::error::Result;
use crate::io::Table;
use crate::linalg::Matrix;
use crate::models::{henon_forward, henon_inverse, Henon, Model};
use crate::sampling::{descend_to_good_set, sample_inputs, DescentOptions, Dimension, GoodSetSpec, SamplerSpec};

pub const NATURAL_REFERENCE: (f64, f64) = (1.0, 1.0);
pub const U2_RANGE: (f64, f64) = (-2.0, 30.0);
pub const W2_RANGE: (f64, f64) = (-1.5, 0.7);
pub const INITS: usize = 40000;
pub const THRESHOLD: f64 = 0.8;
pub const INPUT_CANDIDATES: usize = 30;
pub const MIXED_EXPONENT: f64 = 4.0;
/// Mixed-kernel bandwidth as a fraction of the median input squared distance.
pub const MIXED_SCALE_FRACTION: f64 = 0.1;

pub fn henon(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Henon, seed);
    let model = Model::Henon(Henon::default());
    let (u2, w2) = henon_forward(NATURAL_REFERENCE.0, NATURAL_REFERENCE.1);
    let good = GoodSetSpec::from_reference(&model, &[u2, w2], THRESHOLD)?;

    let inits = sample_inputs(&SamplerSpec::new(
        vec![Dimension::uniform(U2_RANGE.0, U2_RANGE.1), Dimension::uniform(W2_RANGE.0, W2_RANGE.1)],
        INITS,
        seed,
    ))?;
    let runs = descend_to_good_set(&model, &good, &inits, &DescentOptions::new(THRESHOLD))?;
    let p = runs.terminals();
    res.metric("descent_runs", runs.runs.len() as f64);
    res.metric("good_points", p.nrows() as f64);
    let f = Matrix::from_rows(&p.rows().map(|r| model.evaluate(r)).collect::<Result<Vec<_>>>()?)?;
    let natural = p.rows().map(|r| henon_inverse(r[0], r[1])).collect::<Result<Vec<_>>>()?;
    let lambda: Vec<f64> = natural.iter().map(|n| n.0).collect();
    let a: Vec<f64> = natural.iter().map(|n| n.1).collect();
    let cloud = PointCloud::from_parts(p.clone(), Some(f))?;

    // Input-only kernel: how many independent directions among the first 30?
    let sp_in = diffusion_map_with_rule(&cloud, KernelFamily::InputOnly, &ScaleRule::default(), INPUT_CANDIDATES)?;
    let opts = SelectOptions { max_candidates: Some(INPUT_CANDIDATES), ..SelectOptions::default() };
    let sel_in = select_independent_coordinates(&sp_in, 2, opts)?;
    res.metric("input_only_coordinates", sel_in.indices.len() as f64);
    if let Some(&j) = sel_in.indices.get(1) {
        res.metric("input_only_second_index", j as f64);
    }

    // Mixed kernel; the input scale is a fraction of the median heuristic.
    let d = pairwise_dissimilarity(&cloud, &KernelSpec::mixed(1.0, MIXED_EXPONENT))?;
    let s = median_sq_distance(d.input.as_ref().expect("mixed kernels use inputs"))?;
    let sp_mx = diffusion_map(&cloud, &KernelSpec::mixed(MIXED_SCALE_FRACTION * s, MIXED_EXPONENT), 12)?;
    let sel_mx = select_independent_coordinates(&sp_mx, 2, SelectOptions::default())?;
    res.metric("mixed_coordinates", sel_mx.indices.len() as f64);
    let phi1 = sp_mx.psi(1);
    let phi2 = sel_mx.indices.get(1).map(|&j| sp_mx.psi(j)).unwrap_or_else(|| vec![0.0; phi1.len()]);
    let dep = |x: &[f64], y: &[f64]| dependence_score(x, y, DependenceMethod::Binned).map(|s| s.score);
    res.metric("mixed_phi1_dependence_a", dep(&a, &phi1)?);
    res.metric("mixed_phi2_dependence_lambda", dep(&lambda, &phi2)?);
    res.metric("mixed_phi1_dependence_lambda", dep(&lambda, &phi1)?);
    res.metric("mixed_phi2_dependence_a", dep(&a, &phi2)?);
    if let Some(&j) = sel_mx.indices.get(1) {
        res.metric("mixed_second_index", j as f64);
    }

    res.table(
        "henon_good_set",
        Table::from_columns(vec![
            ("u2", p.column(0)),
            ("w2", p.column(1)),
            ("lambda", lambda),
            ("a", a),
            ("phi1_input", sp_in.psi(1)),
            ("phi1_mixed", phi1),
            ("phi2_mixed", phi2),
        ])?,
    );
    Ok(res)
}
