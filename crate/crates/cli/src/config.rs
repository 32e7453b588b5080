// SPDX-License-Identifier: Apache-2.0

//! `--config` files: flat `key = value` lines or a JSON object. Entries are
//! spliced into the argument list as flags; keys also given on the command
//! line are dropped, so explicit flags win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

/// Options taking a value that may appear before the subcommand.
const GLOBAL_WITH_VALUE: [&str; 3] = ["--out", "--jobs", "--config"];
const GLOBAL_KEYS: [&str; 2] = ["out", "jobs"];

/// Read a config file into `(key, value)` pairs; `None` marks a bare switch.
pub fn read_config(path: &Path) -> Result<Vec<(String, Option<String>)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    if text.trim_start().starts_with('{') {
        parse_json(&text)
    } else {
        parse_flat(&text)
    }
}

fn normalise(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-")
}

fn parse_flat(text: &str) -> Result<Vec<(String, Option<String>)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let value = value.trim();
        match value {
            "true" => out.push((normalise(key), None)),
            "false" => {}
            v => out.push((normalise(key), Some(v.trim_matches('"').to_string()))),
        }
    }
    Ok(out)
}

fn parse_json(text: &str) -> Result<Vec<(String, Option<String>)>, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("config is not valid JSON: {e}"))?;
    let obj = value.as_object().ok_or("config JSON must be an object")?;
    let mut out = Vec::new();
    for (key, v) in obj {
        let scalar = |v: &serde_json::Value| match v {
            serde_json::Value::String(s) => Ok(s.clone()),
            serde_json::Value::Number(n) => Ok(n.to_string()),
            other => Err(format!("config key {key}: unsupported value {other}")),
        };
        match v {
            serde_json::Value::Bool(true) => out.push((normalise(key), None)),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
                out.push((normalise(key), Some(parts.join(","))));
            }
            other => out.push((normalise(key), Some(scalar(other)?))),
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if GLOBAL_WITH_VALUE.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if !s.starts_with('-') {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn to_flags(entries: &[(String, Option<String>)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (k, v) in entries {
        match v {
            Some(v) => out.push(format!("--{k}={v}").into()),
            None => out.push(format!("--{k}").into()),
        }
    }
    out
}

/// Expand `--config` into explicit flags placed before the user's own.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--").map(|k| k.split('=').next().unwrap_or(k).to_string()))
        .collect();
    let entries: Vec<_> = read_config(Path::new(&path))?.into_iter().filter(|(k, _)| !given.contains(k)).collect();
    let (global, local): (Vec<_>, Vec<_>) = entries.into_iter().partition(|(k, _)| GLOBAL_KEYS.contains(&k.as_str()));
    let mut out = Vec::with_capacity(args.len() + global.len() + local.len());
    out.push(args[0].clone());
    out.extend(to_flags(&global));
    match subcommand_index(&args) {
        Some(i) => {
            out.extend(args[1..=i].iter().cloned());
            out.extend(to_flags(&local));
            out.extend(args[i + 1..].iter().cloned());
        }
        None => {
            if !local.is_empty() {
                return Err("config entries need a subcommand".into());
            }
            out.extend(args[1..].iter().cloned());
        }
    }
    Ok(out)
}
