//! Linear active subspaces versus output-only diffusion maps on
//! `f(x) = exp(x₁^α + x₂)`.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{FigureId, FigureResult};
use crate::analysis::{dependence_score, DependenceMethod};
use crate::dmaps::{diffusion_map_with_rule, KernelFamily, PointCloud, ScaleRule};
use crate::error::Result;
use crate::geometry::{active_subspace, ExponentialRidge};
use crate::io::Table;
use crate::linalg::Matrix;
use crate::sampling::{sample_inputs, Dimension, SamplerSpec};

pub const GRID_POINTS: usize = 41;
pub const ALPHAS: [i32; 2] = [1, 5];

pub fn activesub(seed: u64) -> Result<FigureResult> {
    let mut res = FigureResult::new(FigureId::Activesub, seed);
    let x = sample_inputs(&SamplerSpec::new(
        vec![Dimension::grid(-1.0, 1.0, GRID_POINTS), Dimension::grid(-1.0, 1.0, GRID_POINTS)],
        GRID_POINTS * GRID_POINTS,
        seed,
    ))?;
    let mut cols = vec![("x1".to_string(), x.column(0)), ("x2".to_string(), x.column(1))];
    for alpha in ALPHAS {
        let ridge = ExponentialRidge { alpha };
        let f: Vec<f64> = x.rows().map(|r| ridge.value(r)).collect();
        let asub = active_subspace(&x, |p| Ok(ridge.gradient(p)))?;
        let w1 = asub.direction(0);
        let w1_err = (w1[0] - FRAC_1_SQRT_2).abs().max((w1[1] - FRAC_1_SQRT_2).abs());
        let cloud = PointCloud::from_parts(x.clone(), Some(Matrix::column_vector(&f)))?;
        let phi1 = diffusion_map_with_rule(&cloud, KernelFamily::OutputOnly, &ScaleRule::default(), 3)?.psi(1);

        let tag = format!("alpha{alpha}");
        res.metric(&format!("{tag}_w1_error"), w1_err);
        res.metric(&format!("{tag}_eigenvalue_ratio"), asub.eigenvalues[1] / asub.eigenvalues[0]);
        res.metric(
            &format!("{tag}_spearman_f_psi1"),
            dependence_score(&asub.psi1, &f, DependenceMethod::Spearman)?.score,
        );
        res.metric(&format!("{tag}_binned_f_psi1"), dependence_score(&asub.psi1, &f, DependenceMethod::Binned)?.score);
        res.metric(&format!("{tag}_spearman_f_phi1"), dependence_score(&phi1, &f, DependenceMethod::Spearman)?.score);
        cols.push((format!("f_{tag}"), f));
        cols.push((format!("psi1_{tag}"), asub.psi1));
        cols.push((format!("phi1_{tag}"), phi1));
    }
    res.table("activesub", Table::from_columns(cols)?);
    Ok(res)
}
