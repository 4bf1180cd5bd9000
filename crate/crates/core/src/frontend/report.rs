//! Report assembly: text lines plus a JSON object with `"schema": 1`.

use serde_json::{json, Value};

use crate::error::Error;
use crate::exactmath::{fmt_rational, Rational};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug)]
pub struct Report {
    pub text: String,
    pub json: Value,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { text: String::new(), json: json!({ "schema": SCHEMA, "command": command }) }
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    /// Copies the fields of `obj` into the JSON report.
    pub fn merge(&mut self, obj: Value) {
        if let (Value::Object(dst), Value::Object(src)) = (&mut self.json, obj) {
            dst.extend(src);
        }
    }
}

pub fn rat_json(q: &Rational) -> Value {
    json!(fmt_rational(q))
}

/// `(a, b, c)` with rational entries.
pub fn fmt_point(p: &[Rational]) -> String {
    format!("({})", p.iter().map(fmt_rational).collect::<Vec<_>>().join(", "))
}

pub fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::Parse { .. } => "parse",
        Error::Inhomogeneous(_) => "inhomogeneous",
        Error::InconsistentConstant { .. } => "inconsistent_constant",
        Error::Unsupported(_) => "unsupported",
        Error::Invariant(_) => "invariant",
        Error::Invalid(_) => "invalid",
    };
    let mut err = json!({ "kind": kind, "message": e.to_string(), "exit_code": e.exit_code() });
    match e {
        Error::Parse { line, col, message } => {
            err["line"] = json!(line);
            err["column"] = json!(col);
            err["message"] = json!(message);
        }
        Error::Inhomogeneous(rep) => {
            let first = rep.terms.first().map(|t| t.1.clone());
            err["terms"] = json!(rep
                .terms
                .iter()
                .map(|(t, d)| json!({
                    "term": t,
                    "dimension": crate::dimanal::fmt_dim(&rep.base_dims, d),
                    "differs": Some(d) != first.as_ref(),
                }))
                .collect::<Vec<_>>());
        }
        Error::InconsistentConstant { name, first, second } => {
            err["constant"] = json!(name);
            err["dimensions"] = json!([first, second]);
        }
        _ => {}
    }
    json!({ "schema": SCHEMA, "error": err })
}
