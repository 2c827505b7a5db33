//! Input-space samplers, dataset generation, good-set filtering and
//! gradient-descent sampling of good sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dmaps::PointCloud;
use crate::error::{config, Result};
use crate::linalg::{norm2, Matrix};
use crate::models::{Model, ModelId, ObservationProtocol};
use crate::parallel::par_map;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Uniform,
    LogUniform,
    Grid,
}

/// Range and spacing of one input dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub lo: f64,
    pub hi: f64,
    pub spacing: Spacing,
    /// Lattice size for grid dimensions (defaults to the sample count).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl Dimension {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self { lo, hi, spacing: Spacing::Uniform, points: None }
    }
    pub fn log_uniform(lo: f64, hi: f64) -> Self {
        Self { lo, hi, spacing: Spacing::LogUniform, points: None }
    }
    pub fn grid(lo: f64, hi: f64, points: usize) -> Self {
        Self { lo, hi, spacing: Spacing::Grid, points: Some(points) }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return config(format!("range [{}, {}] is empty or infinite", self.lo, self.hi));
        }
        if self.spacing != Spacing::Grid && self.lo == self.hi {
            return config(format!("random range [{}, {}] is empty", self.lo, self.hi));
        }
        if self.spacing == Spacing::LogUniform && !(self.lo > 0.0) {
            return config(format!("log-uniform spacing needs positive bounds, got [{}, {}]", self.lo, self.hi));
        }
        if self.points == Some(0) {
            return config("grid dimension needs at least one point");
        }
        Ok(())
    }

    fn lattice(&self, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        match self.spacing {
            Spacing::LogUniform => (self.lo.ln() + u * (self.hi / self.lo).ln()).exp(),
            _ => self.lo + u * (self.hi - self.lo),
        }
    }
}

/// Describes how inputs are drawn.
///
/// Without grid dimensions, `count` points are drawn. Grid dimensions form a
/// lattice, and the random dimensions (if any) get one independent draw per
/// lattice node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub dims: Vec<Dimension>,
    pub count: usize,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(dims: Vec<Dimension>, count: usize, seed: u64) -> Self {
        Self { dims, count, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return config("sampler needs at least one dimension");
        }
        if self.count == 0 {
            return config("sample count must be at least 1");
        }
        self.dims.iter().try_for_each(Dimension::validate)
    }

    fn grid_sizes(&self) -> Vec<Option<usize>> {
        self.dims.iter().map(|d| (d.spacing == Spacing::Grid).then(|| d.points.unwrap_or(self.count))).collect()
    }

    /// Number of points [`sample_inputs`] returns.
    pub fn len(&self) -> usize {
        let sizes = self.grid_sizes();
        if sizes.iter().all(Option::is_none) {
            self.count
        } else {
            sizes.iter().flatten().product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Independent stream for sample `index`, so draws never depend on order.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `L × M` matrix of inputs.
pub fn sample_inputs(spec: &SamplerSpec) -> Result<Matrix> {
    spec.validate()?;
    let m = spec.dims.len();
    let sizes = spec.grid_sizes();
    let lattices: Vec<Option<Vec<f64>>> = spec.dims.iter().zip(&sizes).map(|(d, s)| s.map(|n| d.lattice(n))).collect();
    let l = spec.len();
    let mut out = Matrix::zeros(l, m);
    for i in 0..l {
        let mut rng = sample_rng(spec.seed, i as u64);
        // Mixed-radix decomposition of i over the grid dimensions (last fastest).
        let mut rem = i;
        for j in (0..m).rev() {
            if let Some(lat) = &lattices[j] {
                out[(i, j)] = lat[rem % lat.len()];
                rem /= lat.len();
            }
        }
        for j in 0..m {
            if lattices[j].is_none() {
                out[(i, j)] = spec.dims[j].draw(&mut rng);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub model: ModelId,
    pub protocol: ObservationProtocol,
    pub sampler: SamplerSpec,
    pub requested: usize,
    pub failures: usize,
    pub failed_ids: Vec<u64>,
    /// First failure message, for diagnostics.
    pub first_failure: Option<String>,
    /// Filters applied after generation, in order.
    pub lineage: Vec<String>,
}

/// Evaluated samples; failed evaluations are excluded and counted.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub ids: Vec<u64>,
    pub inputs: Matrix,
    pub outputs: Matrix,
    pub manifest: DatasetManifest,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn cloud(&self) -> Result<PointCloud> {
        PointCloud::new(self.ids.clone(), self.inputs.clone(), Some(self.outputs.clone()))
    }

    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            ids: idx.iter().map(|&i| self.ids[i]).collect(),
            inputs: self.inputs.select_rows(idx),
            outputs: self.outputs.select_rows(idx),
            manifest: self.manifest.clone(),
        }
    }
}

pub fn generate_dataset(model: &Model, sampler: &SamplerSpec) -> Result<Dataset> {
    let inputs = sample_inputs(sampler)?;
    evaluate_inputs(model, &inputs, sampler.clone())
}

/// Evaluates the model at given inputs.
pub fn evaluate_inputs(model: &Model, inputs: &Matrix, sampler: SamplerSpec) -> Result<Dataset> {
    if inputs.ncols() != model.input_dim() {
        return config(format!("{} inputs per sample for a model with {} inputs", inputs.ncols(), model.input_dim()));
    }
    let results = par_map(inputs.nrows(), |i| model.evaluate(inputs.row(i)));
    let n = model.output_dim();
    let (mut ids, mut keep, mut out) = (Vec::new(), Vec::new(), Vec::new());
    let (mut failed_ids, mut first_failure) = (Vec::new(), None);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(f) => {
                ids.push(i as u64);
                keep.push(i);
                out.extend(f);
            }
            Err(e) => {
                failed_ids.push(i as u64);
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let manifest = DatasetManifest {
        seed: sampler.seed,
        model: model.id(),
        protocol: model.protocol(),
        requested: inputs.nrows(),
        failures: failed_ids.len(),
        failed_ids,
        first_failure,
        sampler,
        lineage: Vec::new(),
    };
    Ok(Dataset { ids, inputs: inputs.select_rows(&keep), outputs: Matrix::from_vec(keep.len(), n, out)?, manifest })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    /// `‖f(p) - f*‖²`.
    #[default]
    SquaredNorm,
    /// `‖f(p) - f*‖`.
    Norm,
}

/// Reference output and tolerance defining the good set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodSetSpec {
    pub reference: Option<Vec<f64>>,
    pub target: Vec<f64>,
    pub delta: f64,
    #[serde(default)]
    pub cost: CostKind,
}

impl GoodSetSpec {
    /// `f* = f(Θ)`.
    pub fn from_reference(model: &Model, theta: &[f64], delta: f64) -> Result<Self> {
        let target = model.evaluate(theta)?;
        Self::from_target(target, delta).map(|s| Self { reference: Some(theta.to_vec()), ..s })
    }

    pub fn from_target(target: Vec<f64>, delta: f64) -> Result<Self> {
        let s = Self { reference: None, target, delta, cost: CostKind::SquaredNorm };
        s.validate()?;
        Ok(s)
    }

    pub fn with_cost(mut self, cost: CostKind) -> Self {
        self.cost = cost;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.target.iter().any(|v| !v.is_finite()) {
            return config("reference output must be finite");
        }
        if !(self.delta > 0.0) {
            return config(format!("tolerance δ must be positive, got {}", self.delta));
        }
        Ok(())
    }

    pub fn residual(&self, f: &[f64]) -> f64 {
        let d: Vec<f64> = f.iter().zip(&self.target).map(|(a, b)| a - b).collect();
        norm2(&d)
    }

    pub fn cost_of(&self, f: &[f64]) -> f64 {
        let r = self.residual(f);
        match self.cost {
            CostKind::SquaredNorm => r * r,
            CostKind::Norm => r,
        }
    }

    /// Cost at `p`; failed evaluations cost `+∞`.
    pub fn cost(&self, model: &Model, p: &[f64]) -> f64 {
        model.evaluate(p).map(|f| self.cost_of(&f)).unwrap_or(f64::INFINITY)
    }
}

/// Rows whose Euclidean residual is below `δ`.
pub fn filter_good(dataset: &Dataset, spec: &GoodSetSpec) -> Result<Dataset> {
    spec.validate()?;
    if dataset.outputs.ncols() != spec.target.len() {
        return config("reference output length does not match the dataset");
    }
    let keep: Vec<usize> = (0..dataset.len()).filter(|&i| spec.residual(dataset.outputs.row(i)) < spec.delta).collect();
    let mut out = dataset.select(&keep);
    out.manifest.lineage.push(format!("filter_good(delta = {}, kept {} of {})", spec.delta, keep.len(), dataset.len()));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    /// Stop at the first iterate with cost below this.
    pub threshold: f64,
    pub max_iters: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl DescentOptions {
    pub fn new(threshold: f64) -> Self {
        Self { threshold, max_iters: 2000, armijo: 1e-4, max_backtracks: 60 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentRun {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentResult {
    pub runs: Vec<DescentRun>,
}

impl DescentResult {
    pub fn converged(&self) -> impl Iterator<Item = &DescentRun> {
        self.runs.iter().filter(|r| r.converged)
    }

    pub fn converged_count(&self) -> usize {
        self.converged().count()
    }

    /// Terminal points of the converged runs as an `L × M` matrix.
    pub fn terminals(&self) -> Matrix {
        let m = self.runs.first().map_or(0, |r| r.end.len());
        let data: Vec<f64> = self.converged().flat_map(|r| r.end.iter().copied()).collect();
        Matrix::from_vec(data.len() / m.max(1), m, data).expect("consistent run dimensions")
    }
}

/// Central differences with relative step `1e-6` and absolute floor `1e-9`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, p: &[f64]) -> Vec<f64> {
    let mut x = p.to_vec();
    (0..p.len())
        .map(|i| {
            let h = (1e-6 * p[i].abs()).max(1e-9);
            x[i] = p[i] + h;
            let fp = f(&x);
            x[i] = p[i] - h;
            let fm = f(&x);
            x[i] = p[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn descend_one(model: &Model, spec: &GoodSetSpec, start: &[f64], opts: &DescentOptions) -> DescentRun {
    let cost = |p: &[f64]| spec.cost(model, p);
    let mut p = start.to_vec();
    let mut c = cost(&p);
    let mut t = 1.0;
    let mut iterations = 0;
    let finish = |p: Vec<f64>, c: f64, iterations, converged| DescentRun {
        start: start.to_vec(),
        end: p,
        cost: c,
        iterations,
        converged,
    };
    while iterations < opts.max_iters {
        if c < opts.threshold {
            return finish(p, c, iterations, true);
        }
        let g = fd_gradient(cost, &p);
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if !(g2.is_finite() && g2 > 0.0) {
            break;
        }
        // Armijo backtracking, starting from twice the last accepted step.
        t *= 2.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let q: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let cq = cost(&q);
            if cq <= c - opts.armijo * t * g2 {
                accepted = Some((q, cq));
                break;
            }
            t *= 0.5;
        }
        let Some((q, cq)) = accepted else { break };
        p = q;
        c = cq;
        iterations += 1;
    }
    let converged = c < opts.threshold;
    finish(p, c, iterations, converged)
}

/// Runs gradient descent on `c(p)` from every row of `inits`.
pub fn descend_to_good_set(
    model: &Model,
    spec: &GoodSetSpec,
    inits: &Matrix,
    opts: &DescentOptions,
) -> Result<DescentResult> {
    spec.validate()?;
    if !(opts.threshold > 0.0) {
        return config("descent threshold must be positive");
    }
    if inits.ncols() != model.input_dim() {
        return config("initializations do not match the model input dimension");
    }
    let runs = par_map(inits.nrows(), |i| descend_one(model, spec, inits.row(i), opts));
    Ok(DescentResult { runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelId, ModelSpec};

    #[test]
    fn grid_lattice_and_midpoint() {
        let s = SamplerSpec::new(vec![Dimension::grid(0.0, 1.0, 3), Dimension::grid(0.0, 1.0, 3)], 9, 0);
        let x = sample_inputs(&s).unwrap();
        assert_eq!(x.nrows(), 9);
        let mut pts: Vec<(f64, f64)> = x.rows().map(|r| (r[0], r[1])).collect();
        pts.dedup();
        assert_eq!(pts.len(), 9);
        assert!(pts.contains(&(0.5, 1.0)));
        let one = SamplerSpec::new(vec![Dimension { points: None, ..Dimension::grid(0.0, 2.0, 1) }], 1, 0);
        assert_eq!(sample_inputs(&one).unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn log_uniform_mean() {
        let s = SamplerSpec::new(vec![Dimension::log_uniform(1e-3, 1e3)], 100_000, 7);
        let x = sample_inputs(&s).unwrap();
        let mean = x.as_slice().iter().map(|v| v.log10()).sum::<f64>() / 1e5;
        assert!(mean.abs() < 0.02, "{mean}");
        assert!(x.as_slice().iter().all(|v| (1e-3..=1e3).contains(v)));
    }

    #[test]
    fn invalid_sampler() {
        assert!(sample_inputs(&SamplerSpec::new(vec![], 5, 0)).is_err());
        assert!(sample_inputs(&SamplerSpec::new(vec![Dimension::uniform(0.0, 1.0)], 0, 0)).is_err());
        assert!(sample_inputs(&SamplerSpec::new(vec![Dimension::log_uniform(0.0, 1.0)], 5, 0)).is_err());
        assert!(sample_inputs(&SamplerSpec::new(vec![Dimension::uniform(1.0, 0.0)], 5, 0)).is_err());
    }

    #[test]
    fn streams_are_order_independent() {
        let s = SamplerSpec::new(vec![Dimension::uniform(0.0, 1.0), Dimension::log_uniform(1.0, 2.0)], 50, 3);
        let a = sample_inputs(&s).unwrap();
        let b = sample_inputs(&SamplerSpec { count: 10, ..s.clone() }).unwrap();
        for i in 0..10 {
            assert_eq!(a.row(i), b.row(i));
        }
        assert_ne!(a, sample_inputs(&SamplerSpec { seed: 4, ..s }).unwrap());
    }

    #[test]
    fn toy_dataset_identity() {
        let model = ModelSpec::default_for(ModelId::Toy).build().unwrap();
        let s = SamplerSpec::new(vec![Dimension::uniform(0.5, 2.0); 2], 100, 1);
        let d = generate_dataset(&model, &s).unwrap();
        assert_eq!(d.len(), 100);
        assert_eq!(d.manifest.failures, 0);
        for r in d.outputs.rows() {
            assert!((r[2] - (2.0 * r[1]).exp()).abs() < 1e-12 * r[2]);
        }
    }

    #[test]
    fn failures_are_counted() {
        let model = ModelSpec::default_for(ModelId::Toy).build().unwrap();
        let s = SamplerSpec::new(vec![Dimension::uniform(-1.0, 1.0), Dimension::uniform(0.5, 1.0)], 200, 2);
        let d = generate_dataset(&model, &s).unwrap();
        assert!(d.manifest.failures > 50);
        assert_eq!(d.len() + d.manifest.failures, 200);
        assert!(d.manifest.first_failure.is_some());
        assert!(d.inputs.column(0).iter().all(|&p| p > 0.0));
    }

    #[test]
    fn filter_is_monotone_in_delta() {
        let model = ModelSpec::default_for(ModelId::Toy).build().unwrap();
        let s = SamplerSpec::new(vec![Dimension::uniform(0.5, 2.0); 2], 500, 5);
        let d = generate_dataset(&model, &s).unwrap();
        let all = filter_good(&d, &GoodSetSpec::from_target(vec![1.0, 0.0, 1.0], f64::INFINITY).unwrap()).unwrap();
        assert_eq!(all.len(), 500);
        let small = filter_good(&d, &GoodSetSpec::from_target(vec![1.0, 0.0, 1.0], 0.1).unwrap()).unwrap();
        let big = filter_good(&d, &GoodSetSpec::from_target(vec![1.0, 0.0, 1.0], 0.5).unwrap()).unwrap();
        assert!(small.ids.iter().all(|i| big.ids.contains(i)));
        assert!(small.len() < big.len());
        assert_eq!(small.manifest.lineage.len(), 1);
        assert!(GoodSetSpec::from_target(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn descent_from_reference_is_immediate() {
        let model = ModelSpec::default_for(ModelId::Toy).build().unwrap();
        let spec = GoodSetSpec::from_reference(&model, &[1.0, 1.0], 1e-3).unwrap();
        let r =
            descend_to_good_set(&model, &spec, &Matrix::from_rows(&[[1.0, 1.0]]).unwrap(), &DescentOptions::new(1e-3))
                .unwrap();
        assert_eq!(r.runs[0].iterations, 0);
        assert!(r.runs[0].converged);
    }

    #[test]
    fn fd_gradient_of_quadratic() {
        let g = fd_gradient(|p| p[0] * p[0] + 3.0 * p[1], &[2.0, 0.0]);
        assert!((g[0] - 4.0).abs() < 1e-6 && (g[1] - 3.0).abs() < 1e-6);
    }
}
