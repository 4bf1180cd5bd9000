//! Browser bindings. Every call returns a JSON report string; failures come
//! back as `{"schema": 1, "error": {...}}` instead of throwing.

use npdim::frontend::cli;
use npdim::frontend::dsl::parse_system;
use npdim::frontend::report::{error_json, Report};
use serde_json::Value;
use wasm_bindgen::prelude::*;

fn reply(r: npdim::Result<Report>) -> String {
    let v = match r {
        Ok(r) => {
            let mut j = r.json;
            j["text"] = Value::String(r.text);
            j
        }
        Err(e) => error_json(&e),
    };
    v.to_string()
}

/// Newton polytope of a polynomial, or the Kruskal polytope when the
/// equation has derivatives.
#[wasm_bindgen]
pub fn polytope(source: &str) -> String {
    reply(parse_system(source).and_then(|s| cli::polytope(&s, false)))
}

/// Expansion on the default facet and root; `root` may be empty.
#[wasm_bindgen]
pub fn expand(source: &str, order: u32, root: &str) -> String {
    let root = Some(root.trim()).filter(|r| !r.is_empty());
    reply(parse_system(source).and_then(|s| cli::expand(&s, None, root, order as usize, None, None)))
}

#[wasm_bindgen]
pub fn nondim(source: &str) -> String {
    reply(parse_system(source).and_then(|s| cli::nondim(&s, false)))
}
