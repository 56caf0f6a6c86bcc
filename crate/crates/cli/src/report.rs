//! Report assembly and rendering.

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Bits,
    Nats,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::Bits => "bits",
            Units::Nats => "nats",
        }
    }

    /// Converts an internal value in nats to display units.
    pub fn show(self, nats: f64) -> f64 {
        match self {
            Units::Bits => nats / std::f64::consts::LN_2,
            Units::Nats => nats,
        }
    }

    /// Converts a user-supplied rate in display units to nats.
    pub fn parse(self, value: f64) -> f64 {
        match self {
            Units::Bits => value * std::f64::consts::LN_2,
            Units::Nats => value,
        }
    }
}

/// A number tagged with its unit.
pub fn quantity(value: f64, unit: &str) -> Value {
    json!({ "value": value, "unit": unit })
}

/// An information quantity converted from nats for display.
pub fn info(units: Units, nats: f64) -> Value {
    quantity(units.show(nats), units.name())
}

pub fn count(value: u64) -> Value {
    json!({ "value": value, "unit": "count" })
}

pub struct Report {
    pub command: &'static str,
    pub units: Units,
    pub seed: Option<u64>,
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, units: Units) -> Self {
        Self {
            command,
            units,
            seed: None,
            inputs: Map::new(),
            results: Map::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) {
        self.inputs.insert(key.to_string(), value.into());
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("command".into(), self.command.into());
        root.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        root.insert("units".into(), self.units.name().into());
        if let Some(seed) = self.seed {
            root.insert("seed".into(), seed.into());
        }
        root.insert("inputs".into(), Value::Object(self.inputs.clone()));
        root.insert("results".into(), Value::Object(self.results.clone()));
        Value::Object(root)
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("report values are finite JSON")
    }

    /// Flat `key,value` rows with dotted paths, one leaf per row.
    pub fn render_csv(&self) -> String {
        let mut rows = Vec::new();
        flatten("", &self.to_value(), &mut rows);
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            out.push_str(&csv_field(&k));
            out.push(',');
            out.push_str(&csv_field(&v));
            out.push('\n');
        }
        out
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
