//! Browser bindings: trajectory comparison, stability map and gait planning.

use std::sync::Arc;

use drs_lip::grid::linspace;
use drs_lip::oracle::{integrate_at, IntegratorConfig};
use drs_lip::planner::{
    build_nlp, com_plan, lower_layer, sample_plan, solve_nlp, DrsPreset, GaitParams, PlannerConfig,
};
use drs_lip::stability::classify;
use drs_lip::{MathieuBasis, ModelParams, PendulumState, SeriesConfig, VerticalSinusoid};
use serde_json::json;
use wasm_bindgen::prelude::*;

const G: f64 = 9.81;
const MASS: f64 = 25.0;

/// Rows `[t, analytic x, integrator x]` flattened.
pub fn trajectory_rows(
    amplitude: f64,
    omega: f64,
    z0: f64,
    x0: f64,
    v0: f64,
    t_end: f64,
    samples: usize,
) -> drs_lip::Result<Vec<f64>> {
    let model = ModelParams::new(z0, G, MASS)?;
    let motion = VerticalSinusoid::new(amplitude, omega)?;
    let basis = Arc::new(MathieuBasis::for_model(
        &model,
        &motion,
        &SeriesConfig::default(),
    )?);
    let ic = PendulumState::new(x0, v0);
    let solution = basis.solve(0.0, ic)?;
    let times = linspace(0.0, t_end, samples.max(2));
    let numeric = integrate_at(
        &model,
        &motion,
        ic,
        0.0,
        &times,
        &IntegratorConfig::default(),
    )?;
    Ok(times
        .iter()
        .zip(&numeric)
        .flat_map(|(&t, n)| [t, solution.position(t), n.x])
        .collect())
}

/// `Re μ` over an `n × n` grid of amplitude (rows) and frequency (columns);
/// NaN where the exponent is unavailable.
pub fn stability_grid(z0: f64, amplitude_max: f64, omega_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let model = match ModelParams::new(z0, G, MASS) {
        Ok(m) => m,
        Err(_) => return vec![f64::NAN; n * n],
    };
    let amplitudes = linspace(0.0, amplitude_max, n);
    let omegas = linspace(omega_max / n as f64, omega_max, n);
    let mut out = Vec::with_capacity(n * n);
    for &a in &amplitudes {
        for &w in &omegas {
            let re = VerticalSinusoid::new(a, w)
                .and_then(|s| classify(&model, &s, 1e-9))
                .map_or(f64::NAN, |r| r.mu2.re);
            out.push(re);
        }
    }
    out
}

/// Plans one cycle and returns it as JSON.
pub fn plan_json(gait: &str, surface: &str, dt: f64) -> Result<String, String> {
    let gait = match gait {
        "G1" => GaitParams::g1(),
        "G2" => GaitParams::g2(),
        other => return Err(format!("unknown gait `{other}`")),
    };
    let motion = surface.parse::<DrsPreset>()?.motion();
    let model = ModelParams::new(gait.z0, G, MASS).map_err(|e| e.to_string())?;
    let config = PlannerConfig::default();
    let run = || -> drs_lip::Result<String> {
        let nlp = build_nlp(&gait, &motion, &model, &config)?;
        let report = solve_nlp(&nlp, &[0.0; 16], &config.solver)?;
        let com = com_plan(&report.x, &gait, &motion, &model, &config)?;
        let body = lower_layer(&com, &gait, &motion, &config)?;
        let rows: Vec<_> = sample_plan(&body, dt)
            .iter()
            .map(|r| json!([r.t, r.base, r.feet, r.support_mask]))
            .collect();
        let polygons: Vec<_> = com
            .schedule
            .phases
            .iter()
            .map(
                |p| json!({ "vertices": p.support_polygon.vertices(), "support": p.cop_reference }),
            )
            .collect();
        Ok(json!({
            "violation": report.max_violation,
            "iterations": report.outer_iterations,
            "polygons": polygons,
            "rows": rows,
        })
        .to_string())
    };
    run().map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn solve(
    amplitude: f64,
    omega: f64,
    z0: f64,
    x0: f64,
    v0: f64,
    t_end: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    trajectory_rows(amplitude, omega, z0, x0, v0, t_end, samples)
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn stability_map(z0: f64, amplitude_max: f64, omega_max: f64, n: usize) -> Vec<f64> {
    stability_grid(z0, amplitude_max, omega_max, n)
}

#[wasm_bindgen]
pub fn plan(gait: &str, surface: &str, dt: f64) -> Result<String, JsError> {
    plan_json(gait, surface, dt).map_err(|e| JsError::new(&e))
}
