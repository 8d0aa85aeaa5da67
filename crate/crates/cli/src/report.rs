//! Deterministic reports.
//!
//! Object keys are sorted (serde_json's default map is ordered) and every
//! float is rounded to 15 significant digits before serialization, so two
//! runs on the same input produce byte-identical JSON.

use cone_ext::scalar::round_sig;
use cone_ext::{Model, Tolerances, C64};
use serde_json::{json, Map, Value};
use std::fmt::Write;

/// Computation routes a numeric claim can name.
pub const CLOSED_FORM: &str = "closed-form";
pub const CONTOUR: &str = "contour";
pub const X_SPACE: &str = "x-space";

/// The result of a subcommand.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub model: Option<Value>,
    pub results: Value,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, tol: &Tolerances, model: Option<&Model>, results: Value) -> Self {
        Report {
            command: command.into(),
            config: serde_json::to_value(tol).expect("tolerances serialize"),
            model: model.map(Model::to_json),
            results,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "tool": {"name": "cone-ext", "version": env!("CARGO_PKG_VERSION")},
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "notes": self.notes,
        });
        if let Some(m) = &self.model {
            v["model"] = m.clone();
        }
        canonical(&v)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let v = self.to_value();
        writeln!(out, "cone-ext {} {}", env!("CARGO_PKG_VERSION"), self.command).unwrap();
        for n in &self.notes {
            writeln!(out, "note: {n}").unwrap();
        }
        if let Some(m) = v.get("model").and_then(|m| m.get("label")).and_then(Value::as_str) {
            writeln!(out, "model: {m}").unwrap();
        }
        text_value(&mut out, "results", &v["results"], 0);
        out
    }
}

/// Rounds floats to 15 significant digits and normalizes `-0`.
pub fn canonical(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap(), 15);
            json!(if x == 0.0 { 0.0 } else { x })
        }
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, x)| (k.clone(), canonical(x))).collect::<Map<_, _>>()),
        other => other.clone(),
    }
}

/// A complex number as `[re, im]`.
pub fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

/// A numeric claim tagged with its route.
pub fn claim(z: C64, route: &str) -> Value {
    json!({"value": cx(z), "route": route})
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn inline(v: &Value) -> Option<String> {
    match v {
        Value::Array(a) if a.iter().all(is_scalar) => {
            Some(format!("[{}]", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
        }
        Value::Array(a) if a.iter().all(|x| inline(x).is_some() && !is_scalar(x)) && a.len() <= 8 => {
            Some(format!("[{}]", a.iter().filter_map(inline).collect::<Vec<_>>().join(", ")))
        }
        Value::String(s) => Some(s.clone()),
        x if is_scalar(x) => Some(x.to_string()),
        _ => None,
    }
}

fn text_value(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    if let Some(s) = inline(v) {
        writeln!(out, "{pad}{key}: {s}").unwrap();
        return;
    }
    writeln!(out, "{pad}{key}:").unwrap();
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                text_value(out, k, x, depth + 1);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                text_value(out, &format!("[{i}]"), x, depth + 1);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_rounds_and_sorts() {
        let v = canonical(&json!({"b": 0.1 + 0.2, "a": [-0.0, 1]}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":[0.0,1],"b":0.3}"#);
    }
}
