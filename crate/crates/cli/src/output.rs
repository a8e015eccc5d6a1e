use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};

use pctc_core::linalg::round_sig;
use pctc_core::OutcomeDistribution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    /// Distribution only: `outcome,probability` rows.
    Csv,
}

pub struct Report {
    value: Value,
    distribution: Option<OutcomeDistribution>,
    pub failed: bool,
}

impl Report {
    pub fn value(value: Value) -> Self {
        Self { value, distribution: None, failed: false }
    }

    pub fn with_distribution(value: Value, d: OutcomeDistribution) -> Self {
        Self { value, distribution: Some(d), failed: false }
    }

    pub fn failing(mut self, failed: bool) -> Self {
        self.failed = failed;
        self
    }

    pub fn render(&self, format: Format) -> Result<String, String> {
        match format {
            Format::Json => {
                let mut v = self.value.clone();
                round_floats(&mut v);
                Ok(serde_json::to_string_pretty(&v).expect("json values serialize") + "\n")
            }
            Format::Csv => {
                let d = self
                    .distribution
                    .as_ref()
                    .ok_or_else(|| "--format csv is only available for commands that output a distribution".to_string())?;
                let mut out = String::from("outcome,probability\n");
                for (k, p) in d.iter() {
                    out.push_str(&format!("{},{}\n", d.bitstring(k), round_sig(p)));
                }
                Ok(out)
            }
        }
    }
}

/// Twelve significant digits everywhere.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn error_json(code: &str, message: &str) -> String {
    serde_json::to_string_pretty(&json!({ "error": { "code": code, "message": message } })).expect("json")
}
