//! Browser bindings: JSON-in/JSON-out wrappers around the twolocus library
//! for the static demo page in `www/`.

use wasm_bindgen::prelude::*;

mod ops;

#[wasm_bindgen]
pub fn rho_curve(config_json: &str, theta_a: f64, theta_b: f64, rho_min: f64, rho_max: f64, points: usize) -> Result<String, JsValue> {
    ops::rho_curve(config_json, theta_a, theta_b, rho_min, rho_max, points)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn count_heatmap(a: usize, b: usize, c: usize, theta_a: f64, theta_b: f64, rho: f64, method: &str) -> Result<String, JsValue> {
    ops::count_heatmap(a, b, c, theta_a, theta_b, rho, method).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn series_check(config_json: &str, theta_a: &str, theta_b: &str) -> Result<String, JsValue> {
    ops::series_check(config_json, theta_a, theta_b).map_err(|e| JsValue::from_str(&e))
}
