//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each operation has a plain Rust form returning JSON (usable and tested
//! natively) and a `#[wasm_bindgen]` wrapper that throws on error.

use serde_json::json;
use wasm_bindgen::prelude::*;

use blhom::blsolver::{solve_series_laplacian, FourierBoundaryData};
use blhom::cell::{compute_corrector_set, CoefficientModel, PeriodicCoefficients};
use blhom::geometry::{build_frame, continued_fraction};

/// `A0` of the laminate `mean + amplitude·cos(2πy₁)` on a `grid²` cell.
pub fn laminate_tensor(mean: f64, amplitude: f64, grid: usize) -> Result<String, String> {
    let model = CoefficientModel::Layered { mean, amplitude, axis: 0 };
    let coeffs = PeriodicCoefficients::from_model(&model, grid).map_err(|e| e.to_string())?;
    let set = compute_corrector_set(&coeffs).map_err(|e| e.to_string())?;
    Ok(json!({
        "a0": set.a0,
        "harmonic_mean": (mean * mean - amplitude * amplitude).sqrt(),
        "arithmetic_mean": mean,
        "residuals": set.residuals,
    })
    .to_string())
}

/// `‖V(·,t) − v̂₀(0)‖` of `cos(2πξ·θ)` for the normal `(n1, n2)`, on
/// `samples` heights in `[0, t_max]`.
pub fn mode_decay(n1: f64, n2: f64, xi1: i32, xi2: i32, t_max: f64, samples: usize) -> Result<String, String> {
    if samples < 2 || !(t_max > 0.0) {
        return Err("need at least two samples and t_max > 0".into());
    }
    let frame = build_frame(&[n1, n2], 0.0).map_err(|e| e.to_string())?;
    let data = FourierBoundaryData::cosine([xi1 as i64, xi2 as i64], 1.0);
    let field = solve_series_laplacian(&data, &frame).map_err(|e| e.to_string())?;
    let t: Vec<f64> = (0..samples).map(|i| t_max * i as f64 / (samples - 1) as f64).collect();
    let l2: Vec<f64> = t.iter().map(|&t| field.l2_fluctuation(t)).collect();
    Ok(json!({
        "rate": field.min_rate(),
        "abs_ndot_xi": field.modes.first().map(|m| m.abs_ndot_xi),
        "t": t,
        "l2": l2,
    })
    .to_string())
}

/// Partial quotients and convergents of the slope `n2/n1` of a normal.
pub fn slope_expansion(slope: f64, depth: usize) -> Result<String, String> {
    let cf = continued_fraction(slope, depth).map_err(|e| e.to_string())?;
    serde_json::to_string(&cf).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = laminateTensor)]
pub fn laminate_tensor_js(mean: f64, amplitude: f64, grid: usize) -> Result<String, JsError> {
    laminate_tensor(mean, amplitude, grid).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = modeDecay)]
pub fn mode_decay_js(n1: f64, n2: f64, xi1: i32, xi2: i32, t_max: f64, samples: usize) -> Result<String, JsError> {
    mode_decay(n1, n2, xi1, xi2, t_max, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = slopeExpansion)]
pub fn slope_expansion_js(slope: f64, depth: usize) -> Result<String, JsError> {
    slope_expansion(slope, depth).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laminate_matches_means() {
        let v: serde_json::Value = serde_json::from_str(&laminate_tensor(2.0, 1.0, 32).unwrap()).unwrap();
        let a11 = v["a0"][0][0].as_f64().unwrap();
        assert!((a11 - 3f64.sqrt()).abs() < 1e-8);
        assert!(laminate_tensor(2.0, 1.0, 8).is_err());
    }

    #[test]
    fn decay_is_exponential() {
        let v: serde_json::Value = serde_json::from_str(&mode_decay(0.0, 1.0, 1, 0, 1.0, 3).unwrap()).unwrap();
        let l2: Vec<f64> = v["l2"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let r = 2.0 * std::f64::consts::PI;
        assert!((l2[2] - (0.5f64).sqrt() * (-r).exp()).abs() < 1e-14);
        assert!(mode_decay(0.0, 1.0, 1, 0, 1.0, 1).is_err());
    }

    #[test]
    fn golden_slope_has_unit_quotients() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let s = slope_expansion(phi, 10).unwrap();
        assert!(s.contains("\"quotients\":[1,1,1"), "{s}");
    }
}
