//! Verdicts on embeddings: functional-dependence scores, sloppiness
//! profiles, level-set tracing, harmonic tests and output histograms.

use serde::{Deserialize, Serialize};

use crate::dmaps::local_linear_residual;
use crate::error::{config, numeric, Result};
use crate::linalg::{norm2, sq_dist, Matrix};
use crate::models::Model;

/// Average ranks (ties share the mean rank), 0-based.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation (signed).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DependenceMethod {
    /// `|ρ_Spearman|`: 1 only for strictly monotone relations.
    Spearman,
    /// `1 - mean within-bin std(y) / std(y)` over equal-count bins of `x`.
    Binned,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependenceScore {
    pub score: f64,
    pub method: DependenceMethod,
    pub n: usize,
}

pub const DEPENDENCE_BINS: usize = 20;

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()
}

/// Equal-count bins of the sort order of `x`.
fn equal_count_bins(x: &[f64], bins: usize) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let n = idx.len();
    (0..bins).map(|b| idx[b * n / bins..(b + 1) * n / bins].to_vec()).filter(|v| !v.is_empty()).collect()
}

/// How well `y` is determined by `x`.
pub fn dependence_score(x: &[f64], y: &[f64], method: DependenceMethod) -> Result<DependenceScore> {
    if x.len() != y.len() {
        return config("dependence score needs equal-length series");
    }
    if x.len() < 10 {
        return config(format!("dependence score needs at least 10 points, got {}", x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return config("dependence score needs finite values");
    }
    let score = match method {
        DependenceMethod::Spearman => spearman(x, y).abs(),
        DependenceMethod::Binned => {
            let global = std_dev(y);
            if global == 0.0 {
                1.0
            } else {
                let groups = equal_count_bins(x, DEPENDENCE_BINS);
                let within: f64 =
                    groups.iter().map(|g| std_dev(&g.iter().map(|&i| y[i]).collect::<Vec<_>>())).sum::<f64>()
                        / groups.len() as f64;
                (1.0 - within / global).clamp(0.0, 1.0)
            }
        }
    };
    Ok(DependenceScore { score, method, n: x.len() })
}

/// Spread of `y` within level sets of `level` versus across them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSpread {
    /// RMS residual of `y` after a linear fit in `level` within each bin.
    pub within: f64,
    /// Standard deviation of the per-bin means of `y`.
    pub across: f64,
    pub ratio: f64,
}

/// Bins `level` into equal-count bins; the in-bin linear detrending removes
/// the part of the variation that is explained by the bin's finite width.
pub fn level_set_spread(level: &[f64], y: &[f64], bins: usize) -> Result<LevelSpread> {
    if level.len() != y.len() || bins < 2 || level.len() < 3 * bins {
        return config("level-set spread needs equal lengths and at least 3 points per bin");
    }
    let groups = equal_count_bins(level, bins);
    let (mut sse, mut means) = (0.0, Vec::with_capacity(groups.len()));
    for g in &groups {
        let xs: Vec<f64> = g.iter().map(|&i| level[i]).collect();
        let ys: Vec<f64> = g.iter().map(|&i| y[i]).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        sse += xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>();
        means.push(my);
    }
    let within = (sse / y.len() as f64).sqrt();
    let across = std_dev(&means);
    Ok(LevelSpread { within, across, ratio: if across > 0.0 { within / across } else { f64::INFINITY } })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SloppinessProfile {
    pub values: Vec<f64>,
    pub norms: Vec<f64>,
    /// `(max - min) / mean` of the output norms.
    pub relative_range: f64,
}

pub fn relative_range(norms: &[f64]) -> f64 {
    let (lo, hi) = norms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    if hi == lo {
        0.0
    } else {
        (hi - lo) / mean.abs()
    }
}

/// Sweeps input `index` through `values` with the others fixed at `base`.
pub fn sloppiness_profile(model: &Model, base: &[f64], index: usize, values: &[f64]) -> Result<SloppinessProfile> {
    if index >= base.len() || values.is_empty() {
        return config("sloppiness sweep needs a valid input index and at least one value");
    }
    let norms = values
        .iter()
        .map(|&v| {
            let mut p = base.to_vec();
            p[index] = v;
            model.evaluate(&p).map(|f| norm2(&f))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SloppinessProfile { values: values.to_vec(), relative_range: relative_range(&norms), norms })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Arclength step between emitted points.
    pub step: f64,
    /// Required `|φ - c|`.
    pub tolerance: f64,
    /// Maximum points per direction.
    pub max_points: usize,
    /// Stop once the nearest training point is farther than this multiple
    /// of the median nearest-neighbour spacing.
    pub hull_factor: f64,
}

impl TraceOptions {
    pub fn new(step: f64, tolerance: f64) -> Self {
        Self { step, tolerance, max_points: 2000, hull_factor: 3.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceStop {
    Hull,
    MaxPoints,
    /// The corrector failed; the trace is truncated.
    Corrector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetTrace {
    pub level: f64,
    /// Ordered points, one per row.
    pub points: Matrix,
    pub deviations: Vec<f64>,
    pub arclength: Vec<f64>,
    /// Why each end stopped (backward end, forward end).
    pub stops: [TraceStop; 2],
}

impl LevelSetTrace {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn truncated(&self) -> bool {
        self.stops.contains(&TraceStop::Corrector)
    }
}

/// Median nearest-neighbour distance of the rows of `x`.
pub fn median_nn_spacing(x: &Matrix) -> f64 {
    let mut d: Vec<f64> = (0..x.nrows()).map(|i| nearest_distance(x, x.row(i), Some(i))).collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

fn nearest_distance(x: &Matrix, p: &[f64], skip: Option<usize>) -> f64 {
    (0..x.nrows()).filter(|&j| Some(j) != skip).map(|j| sq_dist(p, x.row(j))).fold(f64::INFINITY, f64::min).sqrt()
}

fn fd_grad(field: &impl Fn(&[f64]) -> Result<f64>, p: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut x = p.to_vec();
    (0..p.len())
        .map(|i| {
            x[i] = p[i] + h;
            let a = field(&x)?;
            x[i] = p[i] - h;
            let b = field(&x)?;
            x[i] = p[i];
            Ok((a - b) / (2.0 * h))
        })
        .collect()
}

/// Newton iterations along the gradient onto `φ = c`.
fn correct(field: &impl Fn(&[f64]) -> Result<f64>, p: &[f64], c: f64, h: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    let mut x = p.to_vec();
    for _ in 0..30 {
        let v = field(&x)?;
        if (v - c).abs() < tol {
            return Ok((x, (v - c).abs()));
        }
        let g = fd_grad(field, &x, h)?;
        let g2: f64 = g.iter().map(|a| a * a).sum();
        if !(g2 > 0.0 && g2.is_finite()) {
            return numeric("level-set field has no transverse direction (zero gradient)");
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= (v - c) * gi / g2;
        }
    }
    numeric("level-set corrector did not converge")
}

/// Traces the level set `{x : φ(x) = c}` through `seed` in both directions.
///
/// `hint` selects the tangent direction inside the (M-1)-dimensional level
/// set; in two dimensions any nonzero hint gives the unique tangent.
pub fn level_set_trace(
    field: impl Fn(&[f64]) -> Result<f64>,
    training: &Matrix,
    level: f64,
    seed: &[f64],
    hint: &[f64],
    opts: &TraceOptions,
) -> Result<LevelSetTrace> {
    if seed.len() != training.ncols() || hint.len() != seed.len() || seed.len() < 2 {
        return config("seed, hint and training points must share a dimension of at least 2");
    }
    if !(opts.step > 0.0 && opts.tolerance > 0.0) {
        return config("trace step and tolerance must be positive");
    }
    let h_fd = 1e-3 * opts.step;
    let spacing = median_nn_spacing(training);
    let (start, dev0) = correct(&field, seed, level, h_fd, opts.tolerance)?;
    if nearest_distance(training, &start, None) > opts.hull_factor * spacing {
        return config("seed lies outside the data hull");
    }
    let mut halves = Vec::new();
    let mut stops = [TraceStop::MaxPoints; 2];
    for (side, sign) in [(0usize, -1.0), (1, 1.0)] {
        let mut pts: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut x = start.clone();
        let mut dir: Vec<f64> = hint.iter().map(|v| sign * v).collect();
        for _ in 0..opts.max_points {
            let g = fd_grad(&field, &x, h_fd)?;
            let g2: f64 = g.iter().map(|a| a * a).sum();
            if !(g2 > 0.0) {
                return numeric("level-set field has no transverse direction (zero gradient)");
            }
            // Project the running direction onto the tangent space.
            let along: f64 = dir.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / g2;
            let mut t: Vec<f64> = dir.iter().zip(&g).map(|(a, b)| a - along * b).collect();
            let tn = norm2(&t);
            if !(tn > 0.0) {
                stops[side] = TraceStop::Corrector;
                break;
            }
            t.iter_mut().for_each(|v| *v /= tn);
            let pred: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a + opts.step * b).collect();
            let Ok((next, dev)) = correct(&field, &pred, level, h_fd, opts.tolerance) else {
                stops[side] = TraceStop::Corrector;
                break;
            };
            let moved = sq_dist(&next, &x).sqrt();
            if !(moved >= 0.5 * opts.step && moved <= 2.0 * opts.step) {
                stops[side] = TraceStop::Corrector;
                break;
            }
            if nearest_distance(training, &next, None) > opts.hull_factor * spacing {
                stops[side] = TraceStop::Hull;
                break;
            }
            dir = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            x = next.clone();
            pts.push((next, dev));
        }
        halves.push(pts);
    }
    let mut ordered: Vec<(Vec<f64>, f64)> = halves[0].iter().rev().cloned().collect();
    ordered.push((start, dev0));
    ordered.extend(halves[1].iter().cloned());
    let m = seed.len();
    let points = Matrix::from_vec(ordered.len(), m, ordered.iter().flat_map(|(p, _)| p.iter().copied()).collect())?;
    let mut arclength = vec![0.0; ordered.len()];
    for i in 1..ordered.len() {
        arclength[i] = arclength[i - 1] + sq_dist(&ordered[i].0, &ordered[i - 1].0).sqrt();
    }
    Ok(LevelSetTrace { level, points, deviations: ordered.iter().map(|(_, d)| *d).collect(), arclength, stops })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monotonicity {
    /// All consecutive differences share one strict sign.
    pub monotone: bool,
    /// `|Spearman|` against arclength.
    pub score: f64,
    /// The secondary coordinate does not change along the trace.
    pub zero_variation: bool,
}

pub fn monotonicity_along(secondary: &[f64], arclength: &[f64]) -> Result<Monotonicity> {
    if secondary.len() != arclength.len() || secondary.len() < 10 {
        return config("monotonicity test needs at least 10 trace points");
    }
    let scale = secondary.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let diffs: Vec<f64> = secondary.windows(2).map(|w| w[1] - w[0]).collect();
    let zero_variation = diffs.iter().all(|d| d.abs() <= 1e-12 * scale);
    let monotone = !zero_variation && (diffs.iter().all(|&d| d > 0.0) || diffs.iter().all(|&d| d < 0.0));
    let score = if zero_variation { 0.0 } else { spearman(arclength, secondary).abs() };
    Ok(Monotonicity { monotone, score, zero_variation })
}

/// Local-linear residual of `candidate` regressed on `base`: low ⇒ harmonic.
pub fn harmonic_test(candidate: &[f64], base: &[f64], neighbors: usize) -> Result<f64> {
    local_linear_residual(&Matrix::column_vector(base), candidate, neighbors)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Integrates to one over the edges.
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Largest ratio between the densities of adjacent nonempty bins.
    pub fn max_jump_factor(&self) -> f64 {
        self.density
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 0.0)
            .map(|w| w[0].max(w[1]) / w[0].min(w[1]))
            .fold(1.0, f64::max)
    }
}

pub fn output_histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins < 2 || values.is_empty() {
        return config("histogram needs at least 2 bins and one value");
    }
    if values.iter().any(|v| !v.is_finite()) {
        return config("histogram values must be finite");
    }
    let (mut lo, mut hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let w = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + w * i as f64).collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
    }
    let n = values.len() as f64;
    Ok(Histogram { edges, density: counts.iter().map(|&c| c as f64 / (n * w)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn line(n: usize) -> Vec<f64> {
        (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![2.5, 0.0, 2.5, 1.0]);
    }

    #[test]
    fn cube_is_perfectly_dependent() {
        let x = line(1000);
        let y: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        assert_eq!(dependence_score(&x, &y, DependenceMethod::Spearman).unwrap().score, 1.0);
    }

    #[test]
    fn square_breaks_spearman_not_binned() {
        let x = line(1000);
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        assert!(dependence_score(&x, &y, DependenceMethod::Spearman).unwrap().score < 0.05);
        assert!(dependence_score(&x, &y, DependenceMethod::Binned).unwrap().score > 0.9);
    }

    #[test]
    fn shuffled_is_independent() {
        let x = line(1000);
        let mut y = x.clone();
        y.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(11));
        assert!(dependence_score(&x, &y, DependenceMethod::Spearman).unwrap().score < 0.1);
        assert!(dependence_score(&x, &y, DependenceMethod::Binned).unwrap().score < 0.2);
        assert!(dependence_score(&x[..5], &y[..5], DependenceMethod::Spearman).is_err());
    }

    #[test]
    fn level_spread_detects_dependence() {
        let x = line(600);
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let s = level_set_spread(&x, &y, 20).unwrap();
        assert!(s.ratio < 1e-2, "{s:?}");
        let noisy: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
        assert!(level_set_spread(&x, &noisy, 20).unwrap().ratio > 0.5);
    }

    #[test]
    fn relative_range_of_constant_is_zero() {
        assert_eq!(relative_range(&[2.0, 2.0, 2.0]), 0.0);
        assert!((relative_range(&[1.0, 3.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_circle() {
        // φ = |x|² has circular level sets.
        let training = Matrix::from_fn(400, 2, |i, j| {
            let (a, b) = (i / 20, i % 20);
            -1.5 + 3.0 * if j == 0 { a } else { b } as f64 / 19.0
        });
        let field = |x: &[f64]| Ok(x[0] * x[0] + x[1] * x[1]);
        let opts = TraceOptions { max_points: 100, ..TraceOptions::new(0.05, 1e-6) };
        let tr = level_set_trace(field, &training, 1.0, &[1.1, 0.0], &[0.0, 1.0], &opts).unwrap();
        assert!(tr.len() > 50);
        for (r, d) in tr.points.rows().zip(&tr.deviations) {
            assert!((r[0] * r[0] + r[1] * r[1] - 1.0).abs() < 1e-6);
            assert!(*d < 1e-6);
        }
        assert!(tr.arclength.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(tr.stops, [TraceStop::MaxPoints; 2]);
        let constant = |_: &[f64]| Ok(1.0);
        assert!(level_set_trace(constant, &training, 0.5, &[0.0, 0.0], &[1.0, 0.0], &opts).is_err());
    }

    #[test]
    fn trace_stops_at_hull() {
        let training =
            Matrix::from_fn(100, 2, |i, j| if j == 0 { (i / 10) as f64 / 9.0 } else { (i % 10) as f64 / 9.0 });
        let field = |x: &[f64]| Ok(x[0] + x[1]);
        let tr =
            level_set_trace(field, &training, 1.0, &[0.5, 0.5], &[1.0, -1.0], &TraceOptions::new(0.02, 1e-9)).unwrap();
        assert_eq!(tr.stops, [TraceStop::Hull, TraceStop::Hull]);
        let ends = [tr.points.row(0), tr.points.row(tr.len() - 1)];
        assert!(ends.iter().all(|p| p[0].min(p[1]) < 0.1));
    }

    #[test]
    fn monotonicity_verdicts() {
        let s = line(20);
        let m = monotonicity_along(&s, &s).unwrap();
        assert!(m.monotone && m.score == 1.0);
        let flat = vec![0.3; 20];
        let f = monotonicity_along(&flat, &s).unwrap();
        assert!(!f.monotone && f.zero_variation);
        let bump: Vec<f64> = s.iter().map(|v| v * v).collect();
        assert!(!monotonicity_along(&bump, &s).unwrap().monotone);
    }

    #[test]
    fn harmonic_of_itself_and_noise() {
        let x = line(1000);
        let base: Vec<f64> = x.iter().map(|v| (std::f64::consts::PI * v).cos()).collect();
        assert!(harmonic_test(&base, &base, 16).unwrap() < 1e-6);
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let noise: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        assert!(harmonic_test(&noise, &base, 16).unwrap() > 0.9);
    }

    #[test]
    fn histogram_normalization() {
        let x = line(10_000);
        let h = output_histogram(&x, 10).unwrap();
        let total: f64 = h.density.iter().zip(h.widths()).map(|(d, w)| d * w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(h.density.iter().all(|d| (d - 0.5).abs() < 0.01));
        assert!(h.max_jump_factor() < 1.05);
        let single = output_histogram(&[2.0; 7], 4).unwrap();
        let masses: Vec<f64> = single.density.iter().zip(single.widths()).map(|(d, w)| d * w).collect();
        assert_eq!(masses.iter().filter(|&&m| m == 1.0).count(), 1);
        assert!(output_histogram(&x, 1).is_err());
    }
}
