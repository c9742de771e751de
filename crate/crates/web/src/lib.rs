//! Browser bindings for the demo page in `www/`.
//!
//! Every entry point takes plain numbers or a JSON string and returns a JSON
//! string, so the page needs no generated TypeScript types.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use tropitest::pipeline::{barcode_of, embed_collections, BarcodeParams, EmbedParams};
use tropitest::synthgeo::{pairwise_distances, sample_shape};
use tropitest::tropical::orbit_indices;
use tropitest::twosample::{permutation_null_distribution, permutation_test};
use tropitest::{Barcode, Sample, ShapeKind, ShapeSpec};

/// `size` is the overall radius of the shape.
fn shape(kind: &str, size: f64) -> Result<ShapeSpec, String> {
    let kind: ShapeKind =
        serde_json::from_value(Value::String(kind.into())).map_err(|_| format!("unknown shape `{kind}`"))?;
    let spec = match kind {
        ShapeKind::Circle => ShapeSpec::new(kind, &[("radius", size)], 2),
        // two lobes side by side span the same width as one circle
        ShapeKind::FigureEight => ShapeSpec::new(kind, &[("radius", size / 2.0)], 2),
        ShapeKind::Annulus => ShapeSpec::new(kind, &[("inner_radius", size / 2.0), ("outer_radius", size)], 2),
        ShapeKind::ClusterBlob => ShapeSpec::new(kind, &[("spread", size)], 2),
        ShapeKind::Sphere => ShapeSpec::new(kind, &[("radius", size)], 3),
        ShapeKind::Torus => ShapeSpec::torus(size, size / 3.0),
    };
    spec.map_err(|e| e.to_string())
}

fn bars_json(b: &Barcode) -> Value {
    json!(b.intervals().iter().map(|&(s, t)| [s, t]).collect::<Vec<_>>())
}

/// One sampled cloud and its barcode.
pub fn sample_with_barcode(kind: &str, size: f64, points: usize, noise: f64, seed: u32, dim: usize) -> Result<String, String> {
    let spec = shape(kind, size)?;
    let pc = sample_shape(&spec, points, noise, seed.into()).map_err(|e| e.to_string())?;
    let barcode = barcode_of(&pairwise_distances(&pc), &BarcodeParams::new(dim)).map_err(|e| e.to_string())?;
    Ok(json!({ "points": pc.points(), "bars": bars_json(&barcode), "dim": dim }).to_string())
}

/// Sorted tropical embeddings of barcodes given as
/// `{"barcodes": [[[birth, death], ...], ...], "m": optional int}`.
pub fn embed(input: &str) -> Result<String, String> {
    let v: Value = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let list = v["barcodes"].as_array().ok_or("expected a `barcodes` array")?;
    let barcodes = list
        .iter()
        .map(|bars| {
            let intervals: Vec<(f64, f64)> = serde_json::from_value(bars.clone()).map_err(|e| e.to_string())?;
            Barcode::from_intervals(1, &intervals).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, String>>()?;
    let params = EmbedParams {
        m: v["m"].as_u64(),
        ..EmbedParams::default()
    };
    let embedded = embed_collections(&[barcodes], &params).map_err(|e| e.to_string())?;
    let labels: Vec<String> = orbit_indices(embedded.n)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|o| format!("T({},{})", o.i, o.j))
        .collect();
    Ok(json!({
        "n": embedded.n,
        "m": embedded.m.get(),
        "d": embedded.d(),
        "coordinates": labels,
        "vectors": embedded.dump(0).vectors,
    })
    .to_string())
}

/// Two simulated collections, embedded and tested. Returns the test result,
/// the null distribution and the per-collection barcodes.
#[allow(clippy::too_many_arguments)]
pub fn two_sample(
    kind_a: &str,
    kind_b: &str,
    size: f64,
    count: usize,
    points: usize,
    noise: f64,
    permutations: usize,
    seed: u32,
) -> Result<String, String> {
    let params = BarcodeParams::new(1);
    let mut collections = Vec::new();
    for (g, kind) in [kind_a, kind_b].into_iter().enumerate() {
        let spec = shape(kind, size)?;
        let bcs = (0..count)
            .map(|c| {
                let s = u64::from(seed) * 1_000_003 + (g * count + c) as u64;
                let pc = sample_shape(&spec, points, noise, s).map_err(|e| e.to_string())?;
                barcode_of(&pairwise_distances(&pc), &params).map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, String>>()?;
        collections.push(bcs);
    }
    let embedded = embed_collections(&collections, &EmbedParams::default()).map_err(|e| e.to_string())?;
    let s1 = Sample::from_embeddings(&embedded.embeddings[0]).map_err(|e| e.to_string())?;
    let s2 = Sample::from_embeddings(&embedded.embeddings[1]).map_err(|e| e.to_string())?;
    let result = permutation_test(&s1, &s2, 0.05, permutations, seed.into()).map_err(|e| e.to_string())?;
    let null_values = permutation_null_distribution(&s1, &s2, permutations, seed.into()).map_err(|e| e.to_string())?;
    Ok(json!({
        "result": result,
        "null": null_values,
        "n": embedded.n,
        "m": embedded.m.get(),
        "d": embedded.d(),
        "bars_a": collections[0].iter().map(bars_json).collect::<Vec<_>>(),
        "bars_b": collections[1].iter().map(bars_json).collect::<Vec<_>>(),
    })
    .to_string())
}

#[wasm_bindgen(js_name = sampleWithBarcode)]
pub fn sample_with_barcode_js(kind: &str, size: f64, points: usize, noise: f64, seed: u32, dim: usize) -> Result<String, JsValue> {
    sample_with_barcode(kind, size, points, noise, seed, dim).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = embedBarcodes)]
pub fn embed_js(input: &str) -> Result<String, JsValue> {
    embed(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = twoSampleTest)]
#[allow(clippy::too_many_arguments)]
pub fn two_sample_js(
    kind_a: &str,
    kind_b: &str,
    size: f64,
    count: usize,
    points: usize,
    noise: f64,
    permutations: usize,
    seed: u32,
) -> Result<String, JsValue> {
    two_sample(kind_a, kind_b, size, count, points, noise, permutations, seed).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_has_a_long_loop() {
        let out: Value = serde_json::from_str(&sample_with_barcode("circle", 1.0, 40, 0.02, 1, 1).unwrap()).unwrap();
        assert_eq!(out["points"].as_array().unwrap().len(), 40);
        let longest = out["bars"]
            .as_array()
            .unwrap()
            .iter()
            .map(|b| b[1].as_f64().unwrap() - b[0].as_f64().unwrap())
            .fold(0.0, f64::max);
        assert!(longest > 1.0, "{out}");
    }

    #[test]
    fn embeds_the_worked_example() {
        let out: Value =
            serde_json::from_str(&embed(r#"{"barcodes": [[[2, 3], [3, 4]], [[4, 8]]]}"#).unwrap()).unwrap();
        assert_eq!(out["m"], 3);
        assert_eq!(out["vectors"], json!([[1.0, 2.0, 4.0, 5.0, 7.0], [4.0, 4.0, 8.0, 8.0, 8.0]]));
        assert_eq!(out["coordinates"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn bad_input_is_an_error_not_a_panic() {
        assert!(embed("{").is_err());
        assert!(embed(r#"{"barcodes": [[[3, 1]]]}"#).is_err());
        assert!(sample_with_barcode("hexagon", 1.0, 10, 0.0, 0, 1).is_err());
    }

    #[test]
    fn circles_versus_figure_eights() {
        let out: Value =
            serde_json::from_str(&two_sample("circle", "figure_eight", 1.0, 8, 30, 0.03, 99, 2).unwrap()).unwrap();
        assert_eq!(out["null"].as_array().unwrap().len(), 99);
        assert_eq!(out["result"]["reject"], true, "{}", out["result"]);
    }
}
