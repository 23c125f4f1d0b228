//! WebAssembly bindings for `index.html`. Every function returns a flat
//! row-major table; the row width is given in its documentation.

pub mod curves;

use wasm_bindgen::prelude::*;

fn js(e: wiener_neumann::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Rows `[x, f(x), f_α(x)]` for `kind` in `quadratic`, `quartic`, `tilted_quartic`.
#[wasm_bindgen]
pub fn moreau_curves(kind: &str, alpha: f64, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    curves::moreau(kind, alpha, lo, hi, samples).map_err(js)
}

/// Rows `[x, Ef(x)]` for `kind` in `one`, `xi`, `xi_squared`, `cosine`.
#[wasm_bindgen]
pub fn extension_profile(r: f64, kind: &str, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    curves::extension(r, kind, lo, hi, samples).map_err(js)
}

/// The reflection coefficients for the offset `r` as JSON.
#[wasm_bindgen]
pub fn extension_coefficients(r: f64) -> Result<String, JsError> {
    curves::extension_coefficients(r).map_err(js)
}

/// Rows `[x, u_Ω(x), u_α(x)]`.
#[wasm_bindgen]
pub fn penalized_solution(alpha: f64, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    curves::penalization(alpha, lo, hi, samples).map_err(js)
}
