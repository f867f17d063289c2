//! `--config FILE`: extra flags read from `key=value` lines (or the `config`
//! object of a run manifest), inserted ahead of the command-line flags so the
//! latter win.

use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

use super::CliError;

pub fn expand(mut argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let extra = if text.trim_start().starts_with('{') {
        let v: Value =
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        match v.get("config").unwrap_or(&v) {
            Value::Object(map) => map.iter().flat_map(|(k, v)| json_flags(k, v)).collect(),
            _ => return Err(CliError::usage(format!("{}: expected a JSON object", path.display()))),
        }
    } else {
        line_flags(&text, &path)?
    };
    let at = 2.min(argv.len());
    argv.splice(at..at, extra.into_iter().map(OsString::from));
    Ok(argv)
}

fn config_path(argv: &[OsString]) -> Option<std::path::PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_str()?;
        if a == "--config" {
            return it.next().map(Into::into);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn flag(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

fn line_flags(text: &str, path: &Path) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("{}:{}: expected key=value", path.display(), k + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match (key, value) {
            ("config", _) | (_, "false") => {}
            (_, "true") => out.push(flag(key)),
            _ => out.extend([flag(key), value.to_string()]),
        }
    }
    Ok(out)
}

fn json_flags(key: &str, value: &Value) -> Vec<String> {
    let scalar = |v: &Value| match v {
        Value::String(s) => s.clone(),
        v => v.to_string(),
    };
    match value {
        Value::Null | Value::Bool(false) => Vec::new(),
        _ if key == "config" => Vec::new(),
        Value::Bool(true) => vec![flag(key)],
        Value::Array(items) if items.iter().all(Value::is_number) => {
            vec![flag(key), items.iter().map(scalar).collect::<Vec<_>>().join(",")]
        }
        Value::Array(items) => items.iter().flat_map(|v| [flag(key), scalar(v)]).collect(),
        v => vec![flag(key), scalar(v)],
    }
}
