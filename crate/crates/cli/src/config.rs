//! Optional TOML defaults for the command line.
//!
//! Top-level keys apply to every subcommand, a `[name]` table to subcommand
//! `name` only. Keys use the long flag names (`top-k` or `top_k`). A key is
//! ignored when its flag, or a flag it conflicts with, is already on the
//! command line.

use anyhow::{bail, Context, Result};
use std::path::Path;
use toml::{Table, Value};

pub const SUBCOMMANDS: &[&str] = &[
    "preprocess",
    "train",
    "encode",
    "query",
    "evaluate",
    "correlate",
    "regions",
];

const EXCLUSIVE: &[&[&str]] = &[&["acquisition", "top-k"], &["exact", "samples"]];

/// Returns the path given with `--config`, if any.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn flag_name(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    Some(name.split('=').next().unwrap_or(name))
}

/// Appends `--key value` for every config entry not already given.
pub fn merge(args: Vec<String>, path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| anyhow::anyhow!("config {}: {}", path.display(), e.message()))?;
    let sub = args.iter().skip(1).find(|a| SUBCOMMANDS.contains(&a.as_str())).cloned();

    let present: Vec<String> = args.iter().filter_map(|a| flag_name(a)).map(str::to_string).collect();
    let blocked = |key: &str| {
        present.iter().any(|p| p == key)
            || EXCLUSIVE
                .iter()
                .any(|g| g.contains(&key) && g.iter().any(|o| present.iter().any(|p| p == o)))
    };

    let mut extra = Vec::new();
    let mut push = |key: &str, value: &Value| -> Result<()> {
        let key = key.replace('_', "-");
        if key == "config" || blocked(&key) {
            return Ok(());
        }
        let values = match value {
            Value::Array(items) => items.iter().collect(),
            other => vec![other],
        };
        for v in values {
            match v {
                Value::Boolean(true) => extra.push(format!("--{key}")),
                Value::Boolean(false) => {}
                Value::String(s) => extra.extend([format!("--{key}"), s.clone()]),
                Value::Integer(i) => extra.extend([format!("--{key}"), i.to_string()]),
                Value::Float(f) => extra.extend([format!("--{key}"), f.to_string()]),
                _ => bail!("config key '{key}': unsupported value type"),
            }
        }
        Ok(())
    };

    for (key, value) in &table {
        if !value.is_table() {
            push(key, value)?;
        }
    }
    if let Some(sub) = &sub {
        if let Some(section) = table.get(sub) {
            let section = section
                .as_table()
                .with_context(|| format!("config key '{sub}' must be a table"))?;
            for (key, value) in section {
                push(key, value)?;
            }
        }
    }

    let mut args = args;
    args.extend(extra);
    Ok(args)
}
