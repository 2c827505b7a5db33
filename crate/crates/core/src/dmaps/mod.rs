//! Diffusion maps with input-, output-, mixed- and delay-informed kernels.
//!
//! The pipeline is
//! [`pairwise_dissimilarity`] → [`build_affinity`] →
//! [`density_normalized_laplacian`] → [`spectral_decompose`], wrapped by
//! [`diffusion_map`]. Eigenvectors can then be embedded, screened for
//! harmonics ([`select_independent_coordinates`]) and extended to new
//! points ([`nystrom_extend`]).

mod cloud;
mod kernel;
mod nystrom;
mod scale;
mod select;
mod spectrum;

pub use cloud::PointCloud;
pub use kernel::{
    build_affinity, pairwise_dissimilarity, AffinityMatrix, Dissimilarity, KernelFamily, KernelSpec, ScaleConvention,
};
pub use nystrom::{nystrom_extend, transition_row};
pub use scale::{formula_scale, median_sq_distance, ScaleRule};
pub use select::{local_linear_residual, select_independent_coordinates, EmbeddingSelection, SelectOptions};
pub use spectrum::{
    density_normalized_laplacian, embed, spectral_decompose, DiffusionSpectrum, EmbedMode, MarkovOperator,
    SpectrumOptions,
};

use crate::error::Result;

/// Full pipeline for a fixed kernel: the `k + 1` leading eigenpairs.
pub fn diffusion_map(cloud: &PointCloud, spec: &KernelSpec, k: usize) -> Result<DiffusionSpectrum> {
    let d = pairwise_dissimilarity(cloud, spec)?;
    diffusion_map_from(cloud, &d, spec, k)
}

/// Pipeline variant that reuses precomputed distances.
pub fn diffusion_map_from(
    cloud: &PointCloud,
    d: &Dissimilarity,
    spec: &KernelSpec,
    k: usize,
) -> Result<DiffusionSpectrum> {
    let aff = build_affinity(d, spec)?;
    let op = density_normalized_laplacian(&aff)?;
    spectral_decompose(&op, k, cloud, spec, SpectrumOptions::default())
}

/// Pipeline with the scale chosen by a [`ScaleRule`].
pub fn diffusion_map_with_rule(
    cloud: &PointCloud,
    family: KernelFamily,
    rule: &ScaleRule,
    k: usize,
) -> Result<DiffusionSpectrum> {
    // Distances do not depend on the scale; a placeholder spec selects channels.
    let probe = KernelSpec { family, scale: 1.0 };
    let d = pairwise_dissimilarity(cloud, &probe)?;
    let spec = rule.kernel(family, cloud.len(), &d)?;
    diffusion_map_from(cloud, &d, &spec, k)
}
