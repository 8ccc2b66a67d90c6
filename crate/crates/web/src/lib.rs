//! Browser demo: co-albedo profile, scalar majorants with blow-up, and the
//! degenerate p-Laplacian semigroup. See `www/index.html`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: accretive::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn linspace(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    demo::linspace(lo, hi, samples).map_err(js)
}

#[wasm_bindgen(js_name = coalbedoProfile)]
pub fn coalbedo_profile(
    beta_ice: f64,
    beta_water: f64,
    delta: f64,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    demo::coalbedo_profile(beta_ice, beta_water, delta, lo, hi, samples).map_err(js)
}

#[wasm_bindgen(js_name = coalbedoConstant)]
pub fn coalbedo_constant(beta_ice: f64, beta_water: f64, delta: f64) -> Result<f64, JsError> {
    demo::coalbedo_constant(beta_ice, beta_water, delta).map_err(js)
}

/// `theta` is one of `identity`, `log`, `power`.
#[wasm_bindgen(js_name = majorantCurve)]
pub fn majorant_curve(
    theta: &str,
    exponent: f64,
    rate: f64,
    u0: f64,
    t_end: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    let theta = demo::theta_from_name(theta, exponent).map_err(js)?;
    demo::majorant_curve(&theta, rate, u0, t_end, steps).map_err(js)
}

#[wasm_bindgen(js_name = blowupTime)]
pub fn blowup_time(theta: &str, exponent: f64, rate: f64, u0: f64) -> Result<f64, JsError> {
    let theta = demo::theta_from_name(theta, exponent).map_err(js)?;
    demo::blowup_time(&theta, rate, u0).map_err(js)
}

#[wasm_bindgen(js_name = pLaplaceFlow)]
pub fn p_laplace_flow(p: f64, dim: usize, amplitude: f64, t: f64, n: usize) -> Result<Vec<f64>, JsError> {
    demo::p_laplace_flow(p, dim, amplitude, t, n).map_err(js)
}
