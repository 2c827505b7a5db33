//! Non-identifiable toy model: output-only diffusion coordinates are
//! functions of `p₁p₂`, and the good set around `f* = f(1, 1)` is the
//! hyperbola `p₁p₂ = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;

use super::{FigureId, FigureResult};
use crate::analysis::{level_set_spread, level_set_trace, TraceOptions};
use crate::dmaps::{diffusion_map_with_rule, nystrom_extend, KernelFamily, PointCloud, ScaleRule};
use crate::error::Result;
use crate::io::Table;
use crate::linalg::Matrix;
use crate::models::{Model, Toy};
use crate::sampling::{
    descend_to_good_set, sample_inputs, sample_rng, CostKind, DescentOptions, Dimension, GoodSetSpec, SamplerSpec,
};

pub const CLOUD_POINTS: usize = 1000;
pub const OVAL_CENTER: f64 = 1.25;
/// Semi-axes along `(1, 1)/√2` and `(1, -1)/√2`.
pub const OVAL_AXES: (f64, f64) = (0.7, 0.35);
pub const DESCENT_THRESHOLD: f64 = 1e-3;
pub const DESCENT_GRID: usize = 12;

/// Points uniform in the tilted ellipse.
pub fn oval_cloud(n: usize, seed: u64) -> Matrix {
    Matrix::from_fn(n, 2, {
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let mut rng = sample_rng(seed, i as u64);
                let r = rng.random::<f64>().sqrt();
                let th = 2.0 * PI * rng.random::<f64>();
                let (a, b) = (OVAL_AXES.0 * r * th.cos(), OVAL_AXES.1 * r * th.sin());
                [OVAL_CENTER + FRAC_1_SQRT_2 * (a + b), OVAL_CENTER + FRAC_1_SQRT_2 * (a - b)]
            })
            .collect();
        move |i, j| pts[i][j]
    })
}

pub fn fig1(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Fig1, seed);
    let model = Model::Toy(Toy::default());

    // (b) Output-only embedding of the oval cloud.
    let p = oval_cloud(CLOUD_POINTS, seed);
    let f = Matrix::from_rows(&p.rows().map(|r| model.evaluate(r)).collect::<Result<Vec<_>>>()?)?;
    let cloud = PointCloud::from_parts(p.clone(), Some(f))?;
    let sp = diffusion_map_with_rule(&cloud, KernelFamily::OutputOnly, &ScaleRule::default(), 4)?;
    let phi1 = sp.psi(1);
    let prod: Vec<f64> = p.rows().map(|r| r[0] * r[1]).collect();
    let spread = level_set_spread(&prod, &phi1, 20)?;
    res.metric("level_spread_ratio", spread.ratio);
    res.table(
        "fig1_cloud",
        Table::from_columns(vec![("p1", p.column(0)), ("p2", p.column(1)), ("p1p2", prod), ("phi1", phi1.clone())])?,
    );

    // (a) Gradient descent onto the good set from a grid of starts.
    let target = model.evaluate(&[1.0, 1.0])?;
    let good = GoodSetSpec::from_target(target, DESCENT_THRESHOLD)?.with_cost(CostKind::Norm);
    let inits = sample_inputs(&SamplerSpec::new(
        vec![Dimension::grid(0.5, 2.0, DESCENT_GRID), Dimension::grid(0.5, 2.0, DESCENT_GRID)],
        DESCENT_GRID * DESCENT_GRID,
        seed,
    ))?;
    let runs = descend_to_good_set(&model, &good, &inits, &DescentOptions::new(DESCENT_THRESHOLD))?;
    let mut t = Table::new(["start_p1", "start_p2", "end_p1", "end_p2", "cost", "converged"]);
    let mut worst = 0.0f64;
    for r in &runs.runs {
        t.push(vec![r.start[0], r.start[1], r.end[0], r.end[1], r.cost, super::bool_metric(r.converged)])?;
        if r.converged {
            worst = worst.max((r.end[0] * r.end[1] - 1.0).abs());
        }
    }
    res.metric("descent_runs", runs.runs.len() as f64);
    res.metric("descent_converged", runs.converged_count() as f64);
    res.metric("max_terminal_hyperbola_error", worst);
    res.table("fig1_descent", t);

    // The φ₁ level set through (1, 1), traced on the Nyström extension.
    let field = |x: &[f64]| -> Result<f64> {
        let out = model.evaluate(x)?;
        Ok(nystrom_extend(&sp, None, Some(&out), &[1])?[0])
    };
    let level = field(&[1.0, 1.0])?;
    let range =
        phi1.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - phi1.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let tr = level_set_trace(field, &p, level, &[1.0, 1.0], &[1.0, -1.0], &TraceOptions::new(0.01, 1e-3 * range))?;
    let err = tr.points.rows().map(|r| (r[0] * r[1] - 1.0).abs()).fold(0.0, f64::max);
    res.metric("trace_points", tr.len() as f64);
    res.metric("trace_max_hyperbola_error", err);
    res.table(
        "fig1_trace",
        Table::from_columns(vec![
            ("p1", tr.points.column(0)),
            ("p2", tr.points.column(1)),
            ("arclength", tr.arclength.clone()),
            ("deviation", tr.deviations.clone()),
        ])?,
    );
    Ok(res)
}
