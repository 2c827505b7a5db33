use super::{DiffusionSpectrum, KernelFamily};
use crate::error::{config, numeric, Result};
use crate::linalg::sq_dist;

/// Out-of-sample evaluation of diffusion eigenvectors.
///
/// `ψᵢ(x) = (1/(1-λᵢ)) Σⱼ M̂(x, j) ψᵢ(j)` with `M̂(x, j) ∝ a(x, j)/qⱼ`, the
/// same density normalization used on the training cloud. At a training
/// point this reproduces the stored eigenvector entry.
pub fn nystrom_extend(
    spectrum: &DiffusionSpectrum,
    input: Option<&[f64]>,
    output: Option<&[f64]>,
    indices: &[usize],
) -> Result<Vec<f64>> {
    let weights = transition_row(spectrum, input, output)?;
    indices
        .iter()
        .map(|&k| {
            if k > spectrum.nontrivial() {
                return config(format!("eigenvector {k} was not computed"));
            }
            let lambda = spectrum.eigenvalues[k];
            if lambda >= 1.0 - 1e-10 {
                return numeric(format!("Nyström extension ill-posed for λ{k} = {lambda}"));
            }
            let s: f64 = weights.iter().enumerate().map(|(j, w)| w * spectrum.eigenvectors[(j, k)]).sum();
            Ok(s / (1.0 - lambda))
        })
        .collect()
}

/// Row `M̂(x, ·)` of the extended Markov matrix.
pub fn transition_row(spectrum: &DiffusionSpectrum, input: Option<&[f64]>, output: Option<&[f64]>) -> Result<Vec<f64>> {
    let kernel = &spectrum.kernel;
    let cloud = &spectrum.cloud;
    let use_input = matches!(kernel.family, KernelFamily::InputOnly | KernelFamily::Mixed { .. });
    let use_output = kernel.needs_outputs();
    let input = match (use_input, input) {
        (true, Some(p)) if p.len() == cloud.input_dim() => Some(p),
        (true, _) => return config("Nyström query needs an input block of the training dimension"),
        (false, _) => None,
    };
    let output = match (use_output, output, cloud.outputs()) {
        (true, Some(f), Some(o)) if f.len() == o.ncols() => Some((f, o)),
        (true, _, _) => return config("Nyström query needs an output block of the training dimension"),
        (false, _, _) => None,
    };
    let mut row: Vec<f64> = (0..cloud.len())
        .map(|j| {
            let dp = input.map_or(0.0, |p| sq_dist(p, cloud.inputs().row(j)));
            let df = output.map_or(0.0, |(f, o)| sq_dist(f, o.row(j)));
            kernel.evaluate(dp, df) / spectrum.q[j]
        })
        .collect();
    let total: f64 = row.iter().sum();
    if !(total > 0.0) {
        return numeric("query point is disconnected from the training cloud (all affinities underflow)");
    }
    row.iter_mut().for_each(|w| *w /= total);
    Ok(row)
}
