//! `manifest.txt`: one `key = value` line per resolved parameter and result.

use std::fmt::Display;
use std::io::{self, Write};

use serde_json::Value;

use super::config::{manifest_sections, RunConfig, Subcommand};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    /// Tool identity plus every parameter of the sections `cmd` uses.
    pub fn new(cmd: Subcommand, cfg: &RunConfig, threads: usize) -> Self {
        let mut m = Manifest::default();
        m.push("tool", concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")));
        m.push("subcommand", cmd.name());
        m.push("threads", threads);
        for (k, v) in config_entries(cfg, cmd) {
            m.entries.push((k, v));
        }
        m
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn result(&mut self, key: &str, value: impl Display) {
        self.push(&format!("result.{key}"), value);
    }

    /// Result with a floating-point value, in shortest round-trip form.
    pub fn number(&mut self, key: &str, value: f64) {
        self.result(key, scalar(&serde_json::json!(value)));
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Flattened `section.key = value` pairs of the sections `cmd` uses.
pub fn config_entries(cfg: &RunConfig, cmd: Subcommand) -> Vec<(String, String)> {
    let tree = serde_json::to_value(cfg).expect("config serializes");
    let mut out = Vec::new();
    for section in manifest_sections(cmd) {
        flatten(section, &tree[section], &mut out);
    }
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&format!("{prefix}.{k}"), child, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "none".to_string(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

/// Keys of a manifest file, in order.
pub fn parse_keys(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|l| l.split_once(" = ").map(|(k, _)| k.to_string()))
        .collect()
}
