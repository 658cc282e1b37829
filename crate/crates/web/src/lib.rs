//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes plain numbers or text and returns a JSON string, so the
//! page needs no generated type glue beyond `wasm-bindgen`'s own. The
//! `*_json` functions hold the logic and are what the native tests call.

use qdrift_core::phase_est::{self, PEQuery, PeMethod};
use qdrift_core::trotter::{self, CostQuery, Method};
use qdrift_core::{qdrift, CountMode, Hamiltonian, WeightProfile};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper limit on compiled gate counts in the page, to keep the tab responsive.
pub const MAX_DEMO_GATES: u64 = 2_000_000;
pub const MAX_POINTS: usize = 400;

fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(lo > 0.0 && hi > lo) {
        return Err(format!("need 0 < min < max, got [{lo}, {hi}]"));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be between 2 and {MAX_POINTS}"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

#[derive(Serialize)]
struct Series {
    method: String,
    log10_gates: Vec<f64>,
}

#[derive(Serialize)]
struct SweepCurves {
    t: Vec<f64>,
    series: Vec<Series>,
    /// Best product formula at each `t`.
    best_method: Vec<String>,
    crossover_t: Option<f64>,
}

pub fn sweep_curves_json(
    n_terms: u64,
    max_weight: f64,
    lambda: f64,
    eps: f64,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<String, String> {
    let profile = WeightProfile::new(n_terms, lambda, max_weight).map_err(|e| e.to_string())?;
    let ts = log_grid(t_min, t_max, points)?;
    let methods = Method::all();
    let mut series: Vec<Series> = methods
        .iter()
        .map(|m| Series {
            method: m.to_string(),
            log10_gates: Vec::with_capacity(ts.len()),
        })
        .collect();
    let mut best_method = Vec::with_capacity(ts.len());
    for &t in &ts {
        let q = CostQuery::new(profile, t, eps).map_err(|e| e.to_string())?;
        for (s, &m) in series.iter_mut().zip(&methods) {
            let r = trotter::gate_count(m, &q).map_err(|e| e.to_string())?;
            s.log10_gates.push(r.gates.log10());
        }
        let best = trotter::best_method(&q, &Method::product_formulas()).map_err(|e| e.to_string())?;
        best_method.push(best.method.to_string());
    }
    let crossover_t = trotter::crossover_time(profile, eps, t_min, t_max).map_err(|e| e.to_string())?;
    serde_json::to_string(&SweepCurves {
        t: ts,
        series,
        best_method,
        crossover_t,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct PeCurves {
    p_f: Vec<f64>,
    qdrift_plan: Vec<f64>,
    qdrift_closed_form: Vec<f64>,
    trotter_plan: Vec<f64>,
    trotter_closed_form: Vec<f64>,
    breakeven_p_f: f64,
}

pub fn pe_curves_json(
    n_terms: u64,
    max_weight: f64,
    lambda: f64,
    delta_e: f64,
    pf_min: f64,
    pf_max: f64,
    points: usize,
) -> Result<String, String> {
    let profile = WeightProfile::new(n_terms, lambda, max_weight).map_err(|e| e.to_string())?;
    let grid = log_grid(pf_min, pf_max, points)?;
    let mut out = PeCurves {
        p_f: grid.clone(),
        qdrift_plan: Vec::new(),
        qdrift_closed_form: Vec::new(),
        trotter_plan: Vec::new(),
        trotter_closed_form: Vec::new(),
        breakeven_p_f: phase_est::closed_form_breakeven_pf(&profile, delta_e),
    };
    for p in grid {
        let q = PEQuery::new(profile, delta_e, p).map_err(|e| e.to_string())?;
        let qd = phase_est::integer_optimum(PeMethod::QDrift, &q).map_err(|e| e.to_string())?;
        let tr = phase_est::integer_optimum(PeMethod::Trotter, &q).map_err(|e| e.to_string())?;
        out.qdrift_plan.push(qd.total);
        out.trotter_plan.push(tr.total);
        out.qdrift_closed_form.push(phase_est::closed_form_total(PeMethod::QDrift, &q));
        out.trotter_closed_form.push(phase_est::closed_form_total(PeMethod::Trotter, &q));
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Histogram {
    n_gates: u64,
    tau: f64,
    lambda: f64,
    terms: Vec<String>,
    counts: Vec<u64>,
    expected: Vec<f64>,
    /// The first gates of the sequence, as `±WORD` labels.
    head: Vec<String>,
}

pub fn compile_histogram_json(ham_text: &str, t: f64, eps: f64, seed: u64) -> Result<String, String> {
    let h = Hamiltonian::parse(ham_text).map_err(|e| e.to_string())?;
    let n = qdrift::gate_count_exact(h.lambda(), t, eps).map_err(|e| e.to_string())?;
    if n > MAX_DEMO_GATES {
        return Err(format!(
            "{n} gates exceeds the demo limit of {MAX_DEMO_GATES}; use the command-line tool"
        ));
    }
    let circuit = qdrift::compile(&h, t, eps, seed, CountMode::Exact).map_err(|e| e.to_string())?;
    let counts = circuit.term_histogram();
    let expected = h.terms().iter().map(|term| n as f64 * term.weight() / h.lambda()).collect();
    serde_json::to_string(&Histogram {
        n_gates: n,
        tau: circuit.angle(),
        lambda: h.lambda(),
        terms: h.terms().iter().map(|term| term.op().to_string()).collect(),
        counts,
        expected,
        head: circuit.gates.iter().take(64).map(|g| h.terms()[g.term].op().to_string()).collect(),
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn sweep_curves(
    n_terms: u32,
    max_weight: f64,
    lambda: f64,
    eps: f64,
    t_min: f64,
    t_max: f64,
    points: u32,
) -> Result<String, JsValue> {
    sweep_curves_json(n_terms as u64, max_weight, lambda, eps, t_min, t_max, points as usize)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn pe_curves(
    n_terms: u32,
    max_weight: f64,
    lambda: f64,
    delta_e: f64,
    pf_min: f64,
    pf_max: f64,
    points: u32,
) -> Result<String, JsValue> {
    pe_curves_json(n_terms as u64, max_weight, lambda, delta_e, pf_min, pf_max, points as usize)
        .map_err(|e| JsValue::from_str(&e))
}

/// `seed` arrives as a JS number; integers up to 2^53 survive the trip.
#[wasm_bindgen]
pub fn compile_histogram(ham_text: &str, t: f64, eps: f64, seed: f64) -> Result<String, JsValue> {
    if !(seed >= 0.0 && seed.fract() == 0.0 && seed <= 9_007_199_254_740_992.0) {
        return Err(JsValue::from_str("seed must be a non-negative integer"));
    }
    compile_histogram_json(ham_text, t, eps, seed as u64).map_err(|e| JsValue::from_str(&e))
}
