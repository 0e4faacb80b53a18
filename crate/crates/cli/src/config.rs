//! Config files: a JSON object with a `version`, an optional `command`, the
//! command's parameters at top level and, in suites, an `expect` list.

use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::commands::{usage, CONFIG_VERSION};

#[derive(Debug, Clone)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub params: Value,
    pub expect: Option<Value>,
}

const RESERVED: [&str; 4] = ["version", "command", "description", "expect"];

pub fn load(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    let value: Value = serde_json::from_str(text).map_err(|e| usage(format!("{e}")))?;
    let Value::Object(mut object) = value else {
        return Err(usage("a config must be a JSON object"));
    };
    match object.get("version") {
        Some(Value::Number(v)) if v.as_u64() == Some(CONFIG_VERSION) => {}
        Some(other) => {
            return Err(usage(format!(
                "unsupported config version {other}; expected {CONFIG_VERSION}"
            )))
        }
        None => return Err(usage("missing field `version`")),
    }
    let command = match object.get("command") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => return Err(usage(format!("`command` must be a string, got {other}"))),
    };
    let expect = object.remove("expect");
    for key in RESERVED {
        object.remove(key);
    }
    Ok(ConfigFile {
        command,
        params: Value::Object(object),
        expect,
    })
}

/// Lays `top` over `base`. Objects merge key by key, except that a `graph`
/// naming its own `family` replaces the base graph outright.
pub fn overlay(base: Value, top: Value) -> Value {
    match (base, top) {
        (Value::Object(mut base), Value::Object(top)) => {
            for (key, value) in top {
                let replaces = key == "graph" && value.get("family").is_some();
                let merged = match base.remove(&key) {
                    Some(old) if !replaces => overlay(old, value),
                    _ => value,
                };
                base.insert(key, merged);
            }
            Value::Object(base)
        }
        (_, top) => top,
    }
}

pub fn empty() -> Value {
    Value::Object(Map::new())
}
