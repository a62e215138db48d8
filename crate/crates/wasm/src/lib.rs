//! Browser bindings for the demo page: site fields of a twin-wire device,
//! single-spin gate compilation down to a timed schedule, and the
//! randomized identity checks.

use std::f64::consts::PI;

use globalspin::circuit::text::serialize_circuit;
use globalspin::circuit::{evaluate, su2_compile, EulerAngles};
use globalspin::device::{
    field_profile, load_preset, parse_geometry, pulse_duration, register_weights, CurrentConfig, DeviceGeometry,
    FieldModel,
};
use globalspin::scheduler::{compile_schedule, serialize_schedule, simulate_schedule, CompileOptions};
use globalspin::suite::{run_suite, Suite, SuiteConfig};
use globalspin::{phase_distance, CMatrix, Convention, RegisterSpec, Unitary};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Bundled preset when `toml` is blank, else the given geometry.
fn geometry(toml: &str) -> Result<DeviceGeometry, String> {
    if toml.trim().is_empty() {
        load_preset("paper_device").map_err(err)
    } else {
        parse_geometry(toml).map_err(err)
    }
}

/// Fields at every site for one current configuration, in mT.
pub fn fields(toml: &str, config: &str) -> Result<Value, String> {
    let g = geometry(toml)?;
    let config: CurrentConfig = config.parse().map_err(err)?;
    let line = field_profile(&g, config, FieldModel::Line).map_err(err)?;
    let ribbon = field_profile(&g, config, FieldModel::Ribbon).map_err(err)?;
    let axis = config.axis().unwrap_or_else(|| line.dominant_axis());
    let comp = line.component(axis).ok_or("no field component for this axis")?;
    let sites: Vec<Value> = g
        .sites
        .iter()
        .enumerate()
        .map(|(k, s)| {
            json!({
                "x_nm": s.position.0 * 1e9,
                "z_nm": s.position.1 * 1e9,
                "bx_mT": line.bx[k] * 1e3,
                "bz_mT": line.bz[k] * 1e3,
                "bx_ribbon_mT": ribbon.bx[k] * 1e3,
                "bz_ribbon_mT": ribbon.bz[k] * 1e3,
            })
        })
        .collect();
    let mut out = json!({ "geometry": g.name, "axis": axis.symbol().to_string(), "sites": sites });
    if comp.len() >= 2 {
        let db = (comp[1] - comp[0]).abs();
        out["delta_b_mT"] = json!(db * 1e3);
        if let Ok(t) = pulse_duration(PI, db, g.sites[0].g_factor, Convention::Eq2Half) {
            out["pi_pulse_ns"] = json!(t * 1e9);
        }
    }
    Ok(out)
}

/// Compiles `e^{-iγS^z} e^{-iβS^x} e^{-iαS^z}` on spin 0 of an n-spin register
/// into pulses, then into a schedule on the given device.
pub fn gate(toml: &str, alpha: f64, beta: f64, gamma: f64, n: usize, convention: &str) -> Result<Value, String> {
    let g = geometry(toml)?;
    let convention: Convention = convention.parse().map_err(err)?;
    let reg = RegisterSpec::new(n).map_err(err)?;
    if n < 2 {
        return Err("need at least two spins".into());
    }
    let weights = register_weights(&g, 0, n).map_err(err)?;
    let m: CMatrix = EulerAngles {
        alpha,
        beta,
        gamma,
        phase: 0.0,
    }
    .matrix();
    let target = Unitary::new(m.clone()).map_err(err)?;
    let c = su2_compile(&target, 0, 1, &weights, &reg).map_err(err)?;
    let mut want = CMatrix::identity(1);
    for k in 0..n {
        want = globalspin::kron(&want, &if k == 0 { m.clone() } else { CMatrix::identity(2) });
    }
    let want = Unitary::new(want).map_err(err)?;
    let circuit_distance = phase_distance(&evaluate(&c).map_err(err)?, &want).map_err(err)?;
    let s = compile_schedule(&c, &g, convention, &CompileOptions::default()).map_err(err)?;
    let schedule_distance = phase_distance(&simulate_schedule(&s).map_err(err)?, &want).map_err(err)?;
    Ok(json!({
        "steps": c.step_count(),
        "field_pulses": c.field_count(),
        "exchanges": c.exchange_count(),
        "circuit_distance": circuit_distance,
        "schedule_distance": schedule_distance,
        "total_time_ns": s.total_time() * 1e9,
        "circuit": serialize_circuit(&c),
        "schedule": serialize_schedule(&s),
    }))
}

/// Worst value of every identity check over `samples` random draws.
pub fn identities(suite: &str, samples: usize, seed: u64) -> Result<Value, String> {
    let suite: Suite = suite.parse().map_err(err)?;
    let cfg = SuiteConfig {
        samples,
        seed,
        ..Default::default()
    };
    let checks: Vec<Value> = run_suite(suite, &cfg)
        .map_err(err)?
        .into_iter()
        .map(|c| json!({ "name": c.name, "measured": c.measured, "threshold": c.threshold, "pass": c.pass }))
        .collect();
    Ok(json!(checks))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = fieldProfile)]
pub fn field_profile_js(geometry_toml: &str, config: &str) -> Result<String, JsError> {
    to_js(fields(geometry_toml, config))
}

#[wasm_bindgen(js_name = compileGate)]
pub fn compile_gate_js(
    geometry_toml: &str,
    alpha: f64,
    beta: f64,
    gamma: f64,
    n_spins: usize,
    convention: &str,
) -> Result<String, JsError> {
    to_js(gate(geometry_toml, alpha, beta, gamma, n_spins, convention))
}

#[wasm_bindgen(js_name = checkIdentities)]
pub fn check_identities_js(suite: &str, samples: usize, seed: u32) -> Result<String, JsError> {
    to_js(identities(suite, samples, seed as u64))
}

#[wasm_bindgen(js_name = presetGeometry)]
pub fn preset_geometry_js() -> Result<String, JsError> {
    let g = load_preset("paper_device").map_err(|e| JsError::new(&e.to_string()))?;
    Ok(globalspin::device::write_geometry(&g))
}
