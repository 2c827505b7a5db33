//! Property tests of the structural invariants the library promises.

use effparam::analysis::{dependence_score, DependenceMethod};
use effparam::dmaps::{
    build_affinity, density_normalized_laplacian, diffusion_map, nystrom_extend, pairwise_dissimilarity, KernelSpec,
    PointCloud,
};
use effparam::linalg::Matrix;
use effparam::models::abc::product;
use effparam::models::{henon_forward, henon_inverse, Model, Toy};
use effparam::sampling::{
    descend_to_good_set, filter_good, generate_dataset, sample_inputs, DescentOptions, Dimension, GoodSetSpec,
    SamplerSpec,
};
use proptest::prelude::*;

fn cloud_strategy(max: usize) -> impl Strategy<Value = Matrix> {
    (8..max).prop_flat_map(|n| {
        prop::collection::vec((-2.0..2.0f64, -1.0..1.0f64), n)
            .prop_map(|pts| Matrix::from_rows(&pts.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>()).unwrap())
    })
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn markov_rows_sum_to_one(x in cloud_strategy(40), s in 0.05..5.0f64) {
        let cloud = PointCloud::from_inputs(x).unwrap();
        let spec = KernelSpec::input_only(s);
        let op = density_normalized_laplacian(&build_affinity(&pairwise_dissimilarity(&cloud, &spec).unwrap(), &spec).unwrap()).unwrap();
        for row in op.markov().rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_is_in_range_with_zero_ground_state(x in cloud_strategy(40), s in 0.05..5.0f64) {
        let cloud = PointCloud::from_inputs(x).unwrap();
        let n = cloud.len();
        let sp = diffusion_map(&cloud, &KernelSpec::input_only(s), n - 1).unwrap();
        prop_assert!(sp.eigenvalues[0].abs() < 1e-10);
        for &l in &sp.eigenvalues {
            prop_assert!(l.is_finite() && (-1e-12..=2.0 - 1e-12).contains(&l));
        }
        prop_assert!(sp.eigenvalues.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn larger_scale_increases_every_affinity(x in cloud_strategy(30), s in 0.05..2.0f64, f in 1.01..4.0f64) {
        let cloud = PointCloud::from_inputs(x).unwrap();
        let lo = KernelSpec::input_only(s);
        let hi = KernelSpec::input_only(s * f);
        let d = pairwise_dissimilarity(&cloud, &lo).unwrap();
        let (a, b) = (build_affinity(&d, &lo).unwrap().a, build_affinity(&d, &hi).unwrap().a);
        for i in 0..cloud.len() {
            for j in 0..cloud.len() {
                prop_assert!(b[(i, j)] >= a[(i, j)]);
                if i != j && d.input.as_ref().unwrap()[(i, j)] > 0.0 {
                    prop_assert!(b[(i, j)] > a[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn permuting_points_permutes_eigenvectors(x in cloud_strategy(40), shift in 1usize..7) {
        let n = x.nrows();
        let perm: Vec<usize> = (0..n).map(|i| (i * 5 + shift) % n).collect();
        prop_assume!({
            let mut p = perm.clone();
            p.sort_unstable();
            p.dedup();
            p.len() == n
        });
        let spec = KernelSpec::input_only(0.5);
        let a = diffusion_map(&PointCloud::from_inputs(x.clone()).unwrap(), &spec, 3).unwrap();
        let b = diffusion_map(&PointCloud::from_inputs(x.select_rows(&perm)).unwrap(), &spec, 3).unwrap();
        for k in 1..=3 {
            // Only well-separated eigenvalues have a unique eigenvector.
            let gap = (a.eigenvalues[k] - a.eigenvalues[k - 1]).min(a.eigenvalues.get(k + 1).map_or(1.0, |l| l - a.eigenvalues[k]));
            if gap < 1e-3 {
                continue;
            }
            let (u, v) = (a.psi(k), b.psi(k));
            let sign = if (0..n).map(|i| u[perm[i]] * v[i]).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                prop_assert!((u[perm[i]] - sign * v[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn output_only_affinity_ignores_reparameterized_inputs(
        pts in prop::collection::vec((0.2..3.0f64, 0.2..3.0f64), 8..30),
        c in 0.3..3.0f64,
    ) {
        let model = Model::Toy(Toy::default());
        let p = Matrix::from_rows(&pts.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>()).unwrap();
        // (p₁, p₂) ↦ (c p₁, p₂/c) keeps p₁p₂ and hence every toy output fixed.
        let q = Matrix::from_fn(p.nrows(), 2, |i, j| if j == 0 { c * p[(i, 0)] } else { p[(i, 1)] / c });
        let spec = KernelSpec::output_only(0.7);
        let aff = |inputs: &Matrix| {
            let f = Matrix::from_rows(&inputs.rows().map(|r| model.evaluate(r).unwrap()).collect::<Vec<_>>()).unwrap();
            let cloud = PointCloud::from_parts(inputs.clone(), Some(f)).unwrap();
            build_affinity(&pairwise_dissimilarity(&cloud, &spec).unwrap(), &spec).unwrap().a
        };
        let (a, b) = (aff(&p), aff(&q));
        // Outputs agree up to rounding of the product; the kernel sees the same distances.
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
        let ids: Vec<u64> = (0..p.nrows() as u64).collect();
        let f = Matrix::from_rows(&p.rows().map(|r| model.evaluate(r).unwrap()).collect::<Vec<_>>()).unwrap();
        let c1 = PointCloud::new(ids.clone(), p.clone(), Some(f.clone())).unwrap();
        let c2 = PointCloud::new(ids, q, Some(f)).unwrap();
        let a1 = build_affinity(&pairwise_dissimilarity(&c1, &spec).unwrap(), &spec).unwrap().a;
        let a2 = build_affinity(&pairwise_dissimilarity(&c2, &spec).unwrap(), &spec).unwrap().a;
        prop_assert_eq!(a1.as_slice(), a2.as_slice());
    }

    #[test]
    fn nystrom_reproduces_training_points(x in cloud_strategy(40), s in 0.2..2.0f64) {
        let cloud = PointCloud::from_inputs(x.clone()).unwrap();
        let sp = diffusion_map(&cloud, &KernelSpec::input_only(s), 3).unwrap();
        prop_assume!(sp.eigenvalues[1..].iter().all(|&l| l > 1e-6 && l < 1.0 - 1e-10));
        for i in [0, x.nrows() / 2, x.nrows() - 1] {
            let v = nystrom_extend(&sp, Some(x.row(i)), None, &[1, 2, 3]).unwrap();
            for (k, vk) in v.iter().enumerate() {
                prop_assert!((vk - sp.eigenvectors[(i, k + 1)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn samples_are_deterministic_per_seed(seed in any::<u64>(), n in 1usize..200) {
        let spec = SamplerSpec::new(vec![Dimension::uniform(-1.0, 2.0), Dimension::log_uniform(1e-3, 1e3)], n, seed);
        let a = sample_inputs(&spec).unwrap();
        let b = sample_inputs(&spec).unwrap();
        prop_assert_eq!(a.as_slice(), b.as_slice());
        let ds = generate_dataset(&Model::Toy(Toy::default()), &SamplerSpec::new(vec![Dimension::uniform(0.5, 2.0); 2], n, seed)).unwrap();
        let ds2 = generate_dataset(&Model::Toy(Toy::default()), &SamplerSpec::new(vec![Dimension::uniform(0.5, 2.0); 2], n, seed)).unwrap();
        prop_assert_eq!(ds.inputs.as_slice(), ds2.inputs.as_slice());
        prop_assert_eq!(ds.outputs.as_slice(), ds2.outputs.as_slice());
    }

    #[test]
    fn good_set_filter_is_monotone(seed in any::<u64>(), d1 in 0.01..1.0f64, d2 in 0.01..1.0f64) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let model = Model::Toy(Toy::default());
        let ds = generate_dataset(&model, &SamplerSpec::new(vec![Dimension::uniform(0.5, 2.0); 2], 300, seed)).unwrap();
        let small = filter_good(&ds, &GoodSetSpec::from_reference(&model, &[1.0, 1.0], lo).unwrap()).unwrap();
        let large = filter_good(&ds, &GoodSetSpec::from_reference(&model, &[1.0, 1.0], hi).unwrap()).unwrap();
        prop_assert!(small.ids.iter().all(|id| large.ids.contains(id)));
    }

    #[test]
    fn descent_terminals_are_good_or_flagged(seed in any::<u64>(), threshold in 1e-3..0.5f64) {
        let model = Model::Toy(Toy::default());
        let spec = GoodSetSpec::from_reference(&model, &[1.0, 1.0], threshold).unwrap();
        let inits = sample_inputs(&SamplerSpec::new(vec![Dimension::uniform(0.3, 3.0); 2], 12, seed)).unwrap();
        let runs = descend_to_good_set(&model, &spec, &inits, &DescentOptions::new(threshold)).unwrap();
        for r in &runs.runs {
            prop_assert!(!r.converged || r.cost < threshold);
        }
    }

    #[test]
    fn spearman_is_invariant_under_monotone_maps(v in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 10..200)) {
        let x: Vec<f64> = v.iter().map(|p| p.0).collect();
        let y: Vec<f64> = v.iter().map(|p| p.1).collect();
        let base = dependence_score(&x, &y, DependenceMethod::Spearman).unwrap().score;
        let xt: Vec<f64> = x.iter().map(|a| a.exp()).collect();
        let yt: Vec<f64> = y.iter().map(|b| b.powi(3) + b).collect();
        let moved = dependence_score(&xt, &yt, DependenceMethod::Spearman).unwrap().score;
        prop_assert!((base - moved).abs() < 1e-12);
    }

    #[test]
    fn henon_parameters_round_trip(l in -3.0..3.0f64, a in -3.0..3.0f64) {
        let (u, w) = henon_forward(l, a);
        let (l2, a2) = henon_inverse(u, w).unwrap();
        prop_assert!((l - l2).abs() < 1e-8 * (1.0 + l.abs()) && (a - a2).abs() < 1e-8 * (1.0 + a.abs()));
    }

    #[test]
    fn toy_outputs_are_constant_on_level_sets(p1 in 0.1..5.0f64, c in 0.2..5.0f64) {
        let toy = Toy::default();
        let p2 = 1.0 / p1;
        let a = toy.outputs(p1, p2).unwrap();
        let b = toy.outputs(c * p1, p2 / c).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn abc_product_is_monotone_from_zero_to_one(k in prop::array::uniform3(-3.0..3.0f64)) {
        let (k1, km1, k2) = (10f64.powf(k[0]), 10f64.powf(k[1]), 10f64.powf(k[2]));
        prop_assert!(product(k1, km1, k2, 0.0).unwrap().abs() < 1e-14);
        let mut last = 0.0;
        for i in 1..=40 {
            let c = product(k1, km1, k2, 10f64.powf(-4.0 + 0.25 * i as f64)).unwrap();
            prop_assert!(c >= last - 1e-12 && c <= 1.0 + 1e-12);
            last = c;
        }
    }
}
