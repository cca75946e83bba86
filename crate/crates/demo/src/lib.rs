//! WebAssembly entry points for the static page in `www/`.
//!
//! Every export returns a JSON string; the page parses it and draws on a
//! canvas. The `*_json` functions hold the logic and are plain Rust so they
//! can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use neumann_layers::basis::GreenBasis;
use neumann_layers::finite_p::shoot_increasing;
use neumann_layers::lab::limit_slope;
use neumann_layers::limit::{self, LimitOptions};
use neumann_layers::ode::IntegratorParams;

const MAX_SAMPLES: usize = 2000;

fn basis(n: u32) -> Result<GreenBasis, String> {
    GreenBasis::build(n, &IntegratorParams::default()).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct LimitView {
    beta: Vec<f64>,
    alpha: Vec<f64>,
    amplitude: Vec<f64>,
    r: Vec<f64>,
    u: Vec<f64>,
}

/// Limit `k`-layer configuration on the unit ball and its profile.
pub fn limit_profile_json(n: u32, k: usize, samples: usize) -> Result<String, String> {
    if k == 0 || k > 8 {
        return Err("k must be between 1 and 8".into());
    }
    let basis = basis(n)?;
    let config = limit::solve_limit_config(&basis, k, &LimitOptions::default()).map_err(|e| e.to_string())?;
    let grid = limit::uniform_grid(0.0, 1.0, samples.clamp(2, MAX_SAMPLES));
    let profile = limit::assemble_limit_profile(&basis, &config, &grid).map_err(|e| e.to_string())?;
    to_json(&LimitView {
        beta: config.beta,
        alpha: config.alpha,
        amplitude: config.amplitude,
        r: profile.points.iter().map(|p| p.r).collect(),
        u: profile.points.iter().map(|p| p.u).collect(),
    })
}

#[derive(Serialize)]
struct MonotoneView {
    p: f64,
    c: f64,
    end_value: f64,
    r: Vec<f64>,
    u: Vec<f64>,
    /// `ξ(r)/ξ(1)`, the `p → ∞` limit of the increasing solution.
    limit: Vec<f64>,
    limit_slope: f64,
}

/// Increasing solution on the unit ball at exponent `p`, next to its limit.
pub fn monotone_json(n: u32, p: f64, samples: usize) -> Result<String, String> {
    let params = IntegratorParams::default();
    let sol = shoot_increasing(n, p, 0.0, 1.0, &params).map_err(|e| e.to_string())?;
    let basis = basis(n)?;
    let ab = basis.annulus(0.0, 1.0).map_err(|e| e.to_string())?;
    let x1 = ab.xi(1.0).0;
    let pts = sol.sample(samples.clamp(2, MAX_SAMPLES));
    to_json(&MonotoneView {
        p,
        c: sol.c,
        end_value: sol.end_value(),
        r: pts.iter().map(|s| s.r).collect(),
        u: pts.iter().map(|s| s.u).collect(),
        limit: pts.iter().map(|s| ab.xi(s.r).0 / x1).collect(),
        limit_slope: limit_slope(&basis, 0.0, 1.0).map_err(|e| e.to_string())?,
    })
}

#[derive(Serialize)]
struct PhiView {
    alpha_bar: f64,
    s: Vec<f64>,
    phi: Vec<f64>,
}

/// `φ_{[a,b]}` on the open interval and its critical point `ᾱ` (a maximum).
pub fn phi_curve_json(n: u32, a: f64, b: f64, samples: usize) -> Result<String, String> {
    let basis = basis(n)?;
    let ab = basis.annulus(a, b).map_err(|e| e.to_string())?;
    let alpha_bar = limit::reflection_point(&ab).map_err(|e| e.to_string())?;
    let m = samples.clamp(3, MAX_SAMPLES);
    // Skip the end points, where φ blows up on the ball side.
    let mut s = Vec::with_capacity(m);
    let mut phi = Vec::with_capacity(m);
    for i in 1..m - 1 {
        let x = a + (b - a) * i as f64 / (m - 1) as f64;
        s.push(x);
        phi.push(ab.phi(x).map_err(|e| e.to_string())?.0);
    }
    to_json(&PhiView { alpha_bar, s, phi })
}

#[wasm_bindgen]
pub fn limit_profile(n: u32, k: usize, samples: usize) -> Result<String, JsValue> {
    limit_profile_json(n, k, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn monotone(n: u32, p: f64, samples: usize) -> Result<String, JsValue> {
    monotone_json(n, p, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn phi_curve(n: u32, a: f64, b: f64, samples: usize) -> Result<String, JsValue> {
    phi_curve_json(n, a, b, samples).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limit_profile_peaks_at_one() {
        let v: serde_json::Value = serde_json::from_str(&limit_profile_json(3, 2, 201).unwrap()).unwrap();
        let u: Vec<f64> = serde_json::from_value(v["u"].clone()).unwrap();
        let top = u.iter().cloned().fold(f64::MIN, f64::max);
        assert!(top <= 1.0 + 1e-12 && top > 0.99);
        assert_eq!(v["alpha"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn monotone_below_threshold_is_an_error() {
        assert!(monotone_json(3, 10.0, 50).unwrap_err().contains("eigenvalue"));
        let v: serde_json::Value = serde_json::from_str(&monotone_json(3, 60.0, 50).unwrap()).unwrap();
        assert!(v["c"].as_f64().unwrap() < 1.0);
    }

    #[test]
    fn phi_maximizer_is_reflection_point() {
        let v: serde_json::Value = serde_json::from_str(&phi_curve_json(3, 0.0, 1.0, 401).unwrap()).unwrap();
        let s: Vec<f64> = serde_json::from_value(v["s"].clone()).unwrap();
        let phi: Vec<f64> = serde_json::from_value(v["phi"].clone()).unwrap();
        let (i, _) = phi.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap();
        assert!((s[i] - v["alpha_bar"].as_f64().unwrap()).abs() < 5e-3);
    }
}
