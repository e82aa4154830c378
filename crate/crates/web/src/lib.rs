//! Browser bindings: word application, orbit iteration and gauge claim checks.
//! The `*_json` functions do the work and are usable natively; the exported
//! wrappers only convert errors.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qpainleve::lax::{claims_for, verify_gauge_claim};
use qpainleve::ratfun::{simplify, Limits};
use qpainleve::weyl::apply_word as apply;
use qpainleve::{make_family, parse, IdentityConfig, OrbitState, Stepper, WeylWord};

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Image of `expr` under `word`, as `{"text", "latex"}`.
pub fn apply_word_json(family: &str, word: &str, expr: &str) -> Result<String, String> {
    let fam = make_family(family).map_err(msg)?;
    let w = WeylWord::parse(word).map_err(msg)?;
    let e = parse(expr).map_err(msg)?;
    let img = apply(&fam, &w, &e).map_err(msg)?;
    let img = simplify(&img, &Limits::default()).unwrap_or(img);
    Ok(json!({"text": img.to_string(), "latex": img.to_latex()}).to_string())
}

/// Orbit for a parameter object shaped like the CLI's `--params` file.
pub fn orbit_json(family: &str, params: &str, steps: usize) -> Result<String, String> {
    let fam = make_family(family).map_err(msg)?;
    let v: Value = serde_json::from_str(params).map_err(msg)?;
    let st = OrbitState::from_json(&v).map_err(msg)?;
    Ok(Stepper::new(&fam).orbit(&st, steps).to_json(fam.name).to_string())
}

pub fn verify_claim_json(family: &str, id: &str, seed: u64, with_constraint: bool) -> Result<String, String> {
    let mut fam = make_family(family).map_err(msg)?;
    if !with_constraint {
        fam = fam.without_constraint();
    }
    let cfg = IdentityConfig { seed, ..IdentityConfig::default() };
    let rec = verify_gauge_claim(&fam, id, &cfg).map_err(msg)?;
    Ok(rec.to_json(false).to_string())
}

pub fn claims_json(family: &str) -> Result<String, String> {
    let fam = make_family(family).map_err(msg)?;
    Ok(json!(claims_for(fam.name)).to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn apply_word(family: &str, word: &str, expr: &str) -> Result<String, JsError> {
    js(apply_word_json(family, word, expr))
}

#[wasm_bindgen]
pub fn orbit(family: &str, params: &str, steps: usize) -> Result<String, JsError> {
    js(orbit_json(family, params, steps))
}

#[wasm_bindgen]
pub fn verify_claim(family: &str, id: &str, seed: u64, with_constraint: bool) -> Result<String, JsError> {
    js(verify_claim_json(family, id, seed, with_constraint))
}

#[wasm_bindgen]
pub fn claims(family: &str) -> Result<String, JsError> {
    js(claims_json(family))
}
