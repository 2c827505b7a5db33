//! WebAssembly bindings for the browser demo. Every function returns a JSON
//! string so the page needs no generated glue beyond wasm-bindgen's.

use effparam::dmaps::{
    diffusion_map, diffusion_map_with_rule, formula_scale, select_independent_coordinates, KernelFamily, KernelSpec,
    PointCloud, ScaleConvention, ScaleRule, SelectOptions,
};
use effparam::models::{Model, Toy};
use effparam::pellet::{log_grid, trace_curve, TraceOptions};
use effparam::sampling::{filter_good, generate_dataset, sample_inputs, Dimension, GoodSetSpec, SamplerSpec};
use effparam::Result;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest cloud the page may request; the eigensolver is dense.
pub const MAX_POINTS: usize = 3000;

fn finish(r: Result<serde_json::Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

fn check_points(n: usize) -> Result<()> {
    if !(20..=MAX_POINTS).contains(&n) {
        return Err(effparam::Error::Config(format!("point count must lie in 20..={MAX_POINTS}, got {n}")));
    }
    Ok(())
}

/// Toy model good set around `(1, 1)`: inputs plus the leading diffusion
/// coordinate of an output-only or input-only kernel.
pub fn toy_embedding_json(samples: usize, delta: f64, output_only: bool, seed: u64) -> Result<serde_json::Value> {
    check_points(samples)?;
    let model = Model::Toy(Toy::default());
    let ds = generate_dataset(&model, &SamplerSpec::new(vec![Dimension::uniform(0.2, 3.0); 2], samples, seed))?;
    let good = filter_good(&ds, &GoodSetSpec::from_reference(&model, &[1.0, 1.0], delta)?)?;
    let family = if output_only { KernelFamily::OutputOnly } else { KernelFamily::InputOnly };
    let sp = diffusion_map_with_rule(&good.cloud()?, family, &ScaleRule::default(), 4)?;
    Ok(json!({
        "p1": good.inputs.column(0),
        "p2": good.inputs.column(1),
        "phi1": sp.psi(1),
        "eigenvalues": sp.eigenvalues,
    }))
}

/// Uniform rectangle `[0, width] × [0, height]`: which eigenvectors are new directions.
pub fn rectangle_json(width: f64, height: f64, points: usize, seed: u64) -> Result<serde_json::Value> {
    check_points(points)?;
    let x = sample_inputs(&SamplerSpec::new(
        vec![Dimension::uniform(0.0, width), Dimension::uniform(0.0, height)],
        points,
        seed,
    ))?;
    // The median bandwidth is far too wide for a thin strip; use the sample-size formula.
    let s = ScaleConvention::Doubled.denominator(formula_scale(points, 2, 1.0)?);
    let sp = diffusion_map(&PointCloud::from_inputs(x.clone())?, &KernelSpec::input_only(s), 10)?;
    let sel = select_independent_coordinates(&sp, 2, SelectOptions::default())?;
    let second = sel.indices.get(1).copied().unwrap_or(1);
    Ok(json!({
        "x": x.column(0),
        "y": x.column(1),
        "phi1": sp.psi(1),
        "phij": sp.psi(second),
        "selected": sel.indices,
        "scores": sel.scores,
        "eigenvalues": sp.eigenvalues,
    }))
}

/// Non-isothermal catalyst pellet effectiveness curve `η(Φ)`.
pub fn pellet_json(beta: f64, gamma: f64, points: usize) -> Result<serde_json::Value> {
    check_points(points)?;
    let curve = trace_curve(beta, gamma, &log_grid(0.05, 10.0, points)?, &TraceOptions::default())?;
    Ok(json!({ "phi": curve.phi(), "eta": curve.eta(), "gaps": curve.gaps.len() }))
}

#[wasm_bindgen]
pub fn toy_embedding(samples: usize, delta: f64, output_only: bool, seed: u64) -> std::result::Result<String, JsError> {
    finish(toy_embedding_json(samples, delta, output_only, seed))
}

#[wasm_bindgen]
pub fn rectangle(width: f64, height: f64, points: usize, seed: u64) -> std::result::Result<String, JsError> {
    finish(rectangle_json(width, height, points, seed))
}

#[wasm_bindgen]
pub fn pellet(beta: f64, gamma: f64, points: usize) -> std::result::Result<String, JsError> {
    finish(pellet_json(beta, gamma, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_output_kernel_orders_the_level_sets() {
        let v = toy_embedding_json(600, 0.3, true, 1).unwrap();
        let p: Vec<f64> = v["p1"]
            .as_array()
            .unwrap()
            .iter()
            .zip(v["p2"].as_array().unwrap())
            .map(|(a, b)| a.as_f64().unwrap() * b.as_f64().unwrap())
            .collect();
        let phi: Vec<f64> = v["phi1"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!(effparam::analysis::spearman(&p, &phi).abs() > 0.99);
    }

    #[test]
    fn thin_rectangle_skips_the_harmonics_of_x() {
        // Modes cos(kπx) have λ ∝ k², cos(πy/h) has λ ∝ 1/h² ≈ 11: index 4.
        let v = rectangle_json(1.0, 0.3, 800, 2).unwrap();
        let sel: Vec<u64> = v["selected"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        assert_eq!(sel[0], 1);
        assert!(sel[1] > 2, "{sel:?}");
        let col = |k: &str| v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect::<Vec<f64>>();
        assert!(effparam::analysis::spearman(&col("y"), &col("phij")).abs() > 0.9);
    }

    #[test]
    fn pellet_curve_is_returned() {
        let v = pellet_json(0.2, 20.0, 100).unwrap();
        assert!(v["eta"].as_array().unwrap().len() >= 100);
    }

    #[test]
    fn rejects_out_of_range_sizes() {
        assert!(toy_embedding_json(5, 0.3, true, 1).is_err());
        assert!(rectangle_json(1.0, 0.5, MAX_POINTS + 1, 1).is_err());
    }
}
