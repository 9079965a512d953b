//! TOML recipes. A recipe names a subcommand and its flags:
//!
//! ```toml
//! command = "apep"
//! seed = 7
//! epsilon = 0.01
//! n = 50000
//! ```
//!
//! Keys become `--key value` flags (underscores turn into dashes, arrays
//! are joined with commas, `true` becomes a bare flag, `false` and empty
//! arrays are dropped) and are placed
//! ahead of any command-line overrides, which therefore win.

use std::path::Path;

use anyhow::{bail, Context, Result};
use toml::Value;

pub fn recipe_args(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_recipe(&text).with_context(|| format!("in recipe {}", path.display()))
}

pub fn parse_recipe(text: &str) -> Result<Vec<String>> {
    let table: toml::Table = text.parse()?;
    let Some(Value::String(command)) = table.get("command") else {
        bail!("missing string key `command`");
    };
    let mut args = vec![command.clone()];
    for (key, value) in &table {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Boolean(true) => args.push(flag),
            Value::Boolean(false) => {}
            Value::Array(items) if items.is_empty() => {}
            Value::Array(items) => {
                let parts: Result<Vec<String>> = items.iter().map(scalar).collect();
                args.push(flag);
                args.push(parts?.join(","));
            }
            other => {
                args.push(flag);
                args.push(scalar(other)?);
            }
        }
    }
    Ok(args)
}

fn scalar(v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Boolean(b) => b.to_string(),
        other => bail!("unsupported value {other}"),
    })
}
