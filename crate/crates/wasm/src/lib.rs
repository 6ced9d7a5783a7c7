//! wasm-bindgen surface for the static demo in `www/`.

use cssep::gme::{self, GmeOptions, NonnegativeRecord};
use cssep::linalg::{self, RVec};
use cssep::product::search::range_residual;
use cssep::{named, structured, Result};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn to_js<T>(r: Result<T>) -> std::result::Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

pub fn gme_report(l3: f64, l4: f64, l5: f64, l7: f64, seed: u64) -> Result<serde_json::Value> {
    let rec = NonnegativeRecord::from_free(l3, l4, l5, l7);
    rec.check(1e-9)?;
    let state = rec.state()?;
    let run = gme::gme_power_iteration(&state, &GmeOptions { seed, ..GmeOptions::default() })?;
    let closed = gme::gme_closed_form(&rec)?;
    Ok(json!({
        "lambdas": rec.lambdas,
        "mu": run.mu,
        "gme": run.gme,
        "a": run.a,
        "iterations": run.iterations,
        "kktResidual": run.kkt_residual,
        "closedFormMu": closed.mu,
        "closedFormGme": closed.gme,
    }))
}

/// Power iteration on the nonnegative 4⊗4 record with free weights
/// (λ₃, λ₄, λ₅, λ₇), next to the stationary-point closed form.
#[wasm_bindgen]
pub fn gme(l3: f64, l4: f64, l5: f64, l7: f64, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(gme_report(l3, l4, l5, l7, seed as u64)).map(|v| v.to_string())
}

pub fn hankel_report(moments: &[f64]) -> Result<serde_json::Value> {
    let h = structured::hankel_matrix(moments)?;
    let terms = structured::hankel_psd_decompose(&h)?;
    let err = (structured::vandermonde_sum(&terms, h.nrows()) - &h).norm();
    let nodes: Vec<_> = terms
        .iter()
        .map(|t| match t.node {
            structured::Node::Finite(x) => json!({"weight": t.weight, "node": x}),
            structured::Node::Infinity => json!({"weight": t.weight, "node": "inf"}),
        })
        .collect();
    Ok(json!({"size": h.nrows(), "terms": nodes, "reconstructionError": err}))
}

/// Vandermonde nodes and weights of the PSD Hankel matrix built from
/// moments h₀…h_{2n−2}.
#[wasm_bindgen]
pub fn hankel_nodes(moments: &[f64]) -> std::result::Result<String, JsValue> {
    to_js(hankel_report(moments)).map(|v| v.to_string())
}

/// Unit vector (cos θ, sin θ cos φ, sin θ sin φ cos ψ, sin θ sin φ sin ψ).
pub fn slice_point(theta: f64, phi: f64, psi: f64) -> RVec {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (ss, cs) = psi.sin_cos();
    RVec::from_vec(vec![ct, st * cp, st * sp * cs, st * sp * ss])
}

pub fn residual_grid(entangled: bool, psi: f64, res: usize) -> Result<Vec<f64>> {
    let state = if entangled {
        named::build_entangled_rank6(&named::DEFAULT_SIGMA_WEIGHTS)?.state
    } else {
        named::build_sigma(&named::DEFAULT_SIGMA_WEIGHTS)?.state
    };
    let range = linalg::column_space(&state.real_matrix(), 1e-10);
    let res = res.clamp(2, 400);
    let step = std::f64::consts::PI / (res - 1) as f64;
    let mut out = Vec::with_capacity(res * res);
    for i in 0..res {
        for j in 0..res {
            let x = slice_point(i as f64 * step, j as f64 * step, psi);
            out.push(range_residual(&range, &x, 2));
        }
    }
    Ok(out)
}

/// Row-major res×res grid of ‖(1 − P)x⊗x‖ over (θ, φ) ∈ [0, π]² at fixed ψ,
/// for the range of σ or of the rank-6 entangled state.
#[wasm_bindgen]
pub fn residual_slice(entangled: bool, psi: f64, res: usize) -> std::result::Result<Vec<f64>, JsValue> {
    to_js(residual_grid(entangled, psi, res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gme_report_fields() {
        let v = gme_report(1.0, 200.0, 1.0, 0.0, 7).unwrap();
        assert!(v["mu"].as_f64().unwrap() > 0.0);
        assert!(v["mu"].as_f64().unwrap() >= v["closedFormMu"].as_f64().unwrap() - 1e-9);
    }

    #[test]
    fn hankel_two_nodes() {
        // 0.5·(1,1,1) + 0.5·(1,2,4) moments of a 3×3 Hankel
        let t = [1.0f64, 2.0];
        let m: Vec<f64> = (0..5).map(|k| t.iter().map(|x| 0.5 * x.powi(k)).sum()).collect();
        let v = hankel_report(&m).unwrap();
        let nodes: Vec<f64> = v["terms"].as_array().unwrap().iter().map(|t| t["node"].as_f64().unwrap()).collect();
        assert_eq!(nodes.len(), 2);
        assert!((nodes[0] - 1.0).abs() < 1e-9 && (nodes[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn sigma_slice_touches_zero() {
        // ψ = 0 puts x₀ = e₀ on the grid at θ = 0
        let g = residual_grid(false, 0.0, 21).unwrap();
        assert_eq!(g.len(), 441);
        assert!(g[0] < 1e-9);
        assert!(g.iter().all(|&r| r >= 0.0 && r <= 1.0 + 1e-12));
    }
}
