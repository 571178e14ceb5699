//! Browser bindings for the closed-form criteria. The exported functions
//! return plain numbers or text so the page needs no glue beyond the
//! generated module.

use ssguard_core::criteria::{self, SplitConstants, TimeSeries};
use wasm_bindgen::prelude::*;

/// Lower bound p/(p+3) on the similarity exponent for velocity in L^p.
pub fn gamma_bound(p: f64) -> Result<f64, String> {
    criteria::gamma_lower_bound(p).map_err(|e| e.to_string())
}

/// Optimal cutoff radius and the bound it attains: `[radius, bound]`.
pub fn split_optimum(p: f64, gradw: f64, lp_norm: f64, c_in: f64, c_out: f64) -> Result<[f64; 2], String> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(format!("p must be a positive finite number, got {p}"));
    }
    for (name, v) in [("sup |grad omega|", gradw), ("|u|_p", lp_norm), ("c_in", c_in), ("c_out", c_out)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(format!("{name} must be positive, got {v}"));
        }
    }
    let c = SplitConstants { c_in, c_out };
    let r = criteria::split_radius(c, p, gradw, lp_norm);
    Ok([r, criteria::split_bound(c, p, gradw, lp_norm, r)])
}

/// Runs the Hoelder length-scale criterion on two pasted two-column series.
pub fn ell_mu_summary(holder: &str, energy: &str, mu: f64, t_star: f64) -> Result<String, String> {
    let h = TimeSeries::parse(holder, t_star).map_err(|e| format!("seminorm series: {e}"))?;
    let e = TimeSeries::parse(energy, t_star).map_err(|e| format!("energy series: {e}"))?;
    let r = criteria::ell_mu_criterion(&h, &e, mu, 1.0).map_err(|e| e.to_string())?;
    Ok(format!(
        "length scale ~ (T* - t)^{:.4} (+/- {:.2e}, {} tail samples)\nintegral so far: {:.6e}\n{}",
        r.fit.exponent, r.fit.stderr, r.fit.samples, r.integral, r.verdict
    ))
}

#[wasm_bindgen(js_name = gammaBound)]
pub fn gamma_bound_js(p: f64) -> Result<f64, JsValue> {
    gamma_bound(p).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = splitOptimum)]
pub fn split_optimum_js(p: f64, gradw: f64, lp_norm: f64, c_in: f64, c_out: f64) -> Result<Vec<f64>, JsValue> {
    split_optimum(p, gradw, lp_norm, c_in, c_out).map(|v| v.to_vec()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = ellMuSummary)]
pub fn ell_mu_summary_js(holder: &str, energy: &str, mu: f64, t_star: f64) -> Result<String, JsValue> {
    ell_mu_summary(holder, energy, mu, t_star).map_err(|e| JsValue::from_str(&e))
}
