//! Browser bindings for the demo page in `www/`.
//!
//! The plain functions return JSON strings and are what the native tests
//! exercise. The `#[wasm_bindgen]` wrappers only convert errors.

use majorana_hv::scenarios::{builtin_names, get_builtin};
use majorana_hv::{
    enumerate_exact, hierarchy, parse_scenario, render_scenario, Direction, DistributionDoc, EngineHandle, EngineId,
    Parity, ProtocolStep, Scenario,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Longest exchange sequence the braiding explorer accepts.
pub const MAX_EXCHANGES: u32 = 64;

/// Resolves `source` as a built-in name first, then as scenario text.
pub fn load(source: &str) -> Result<Scenario, String> {
    if let Ok(b) = get_builtin(source.trim()) {
        return Ok(b.scenario);
    }
    let mut s = parse_scenario(source).map_err(|e| e.to_string())?;
    if s.name.is_empty() {
        s.name = "custom".into();
    }
    Ok(s)
}

/// Exact distribution of a scenario on one engine, as a distribution document.
pub fn run_json(source: &str, engine: &str) -> Result<String, String> {
    let id: EngineId = engine.parse()?;
    let s = load(source)?;
    let d = enumerate_exact(EngineHandle::new(id), &s).map_err(|e| e.to_string())?.distribution;
    serde_json::to_string(&DistributionDoc::new(&s.name, id.as_str(), &d)).map_err(|e| e.to_string())
}

fn successive(n: u32, direction: Direction) -> Scenario {
    let mut steps = vec![ProtocolStep::init(&[((1, 2), Parity::Even), ((3, 4), Parity::Even)])];
    steps.extend((0..n).map(|_| ProtocolStep::braid(2, 3, direction)));
    steps.push(ProtocolStep::measure(3, 4));
    Scenario::new(format!("successive-{n}"), 4, steps).expect("valid by construction")
}

/// P((3,4) odd) after `n` = 0..=max_n exchanges of boxes 2 and 3, per engine.
pub fn braiding_json(max_n: u32, clockwise: bool) -> Result<String, String> {
    if max_n > MAX_EXCHANGES {
        return Err(format!("at most {MAX_EXCHANGES} exchanges"));
    }
    let direction = if clockwise { Direction::Cw } else { Direction::Ccw };
    let mut rows = Vec::new();
    for n in 0..=max_n {
        let s = successive(n, direction);
        let mut row = serde_json::Map::new();
        row.insert("n".into(), json!(n));
        for id in EngineId::ALL {
            let d = enumerate_exact(EngineHandle::new(id), &s).map_err(|e| e.to_string())?.distribution;
            let p = d.odd_probability(0, &[]).map_err(|e| e.to_string())?;
            row.insert(id.as_str().into(), json!(majorana_hv::distribution::round_sig12(p)));
        }
        rows.push(Value::Object(row));
    }
    Ok(Value::Array(rows).to_string())
}

pub fn hierarchy_json() -> Result<String, String> {
    let r = hierarchy(None).map_err(|e| e.to_string())?;
    let diff = r.diff();
    serde_json::to_string(&json!({ "report": r, "matches_expected": diff.is_empty(), "diff": diff }))
        .map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn builtins() -> String {
    json!(builtin_names()).to_string()
}

/// Scenario text of a built-in, for the editor.
#[wasm_bindgen]
pub fn builtin_text(name: &str) -> Result<String, JsError> {
    js(get_builtin(name).map(|b| render_scenario(&b.scenario)).map_err(|e| e.to_string()))
}

#[wasm_bindgen]
pub fn run_scenario(source: &str, engine: &str) -> Result<String, JsError> {
    js(run_json(source, engine))
}

#[wasm_bindgen]
pub fn braiding_table(max_n: u32, clockwise: bool) -> Result<String, JsError> {
    js(braiding_json(max_n, clockwise))
}

#[wasm_bindgen]
pub fn hierarchy_report() -> Result<String, JsError> {
    js(hierarchy_json())
}
