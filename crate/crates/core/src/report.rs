//! Artifact writers.
//!
//! JSON summaries carry `"schema": 1`, sort object keys, and print every
//! float as `{:.16e}` (17 significant digits), so identical runs produce
//! identical bytes. Non-finite floats become `null`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;
use crate::function::fmt_f64;

pub const SCHEMA: u64 = 1;

/// Env var overriding the configured output directory.
pub const OUTPUT_ENV: &str = "ROUGH_MORREY_OUT";

/// `$ROUGH_MORREY_OUT`, else `configured`, else `out`.
pub fn output_dir(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUTPUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => configured.map_or_else(|| PathBuf::from("out"), Path::to_path_buf),
    }
}

/// Wraps `body` as `{"schema": 1, "command": ..., ...body}`.
pub fn summary<T: Serialize>(command: &str, body: &T) -> Result<Value> {
    let mut map = Map::new();
    map.insert("schema".into(), Value::from(SCHEMA));
    map.insert("command".into(), Value::from(command));
    match serde_json::to_value(body)? {
        Value::Object(m) => map.extend(m),
        other => {
            map.insert("result".into(), other);
        }
    }
    Ok(Value::Object(map))
}

/// Deterministic pretty JSON with fixed float formatting.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    emit(v, 0, &mut out);
    out.push('\n');
    out
}

fn emit(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64");
                if x.is_finite() {
                    out.push_str(&fmt_f64(x));
                } else {
                    out.push_str("null");
                }
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(indent + 1, out);
                emit(x, indent + 1, out);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                emit(&m[*k], indent + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, to_json_string(v))?;
    Ok(())
}

/// Creates the parent directory and opens `path` for writing.
pub fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_are_fixed_width() {
        let v = summary("ap", &serde_json::json!({"characteristic": 1.0, "n": 3, "bad": f64::NAN})).unwrap();
        let s = to_json_string(&v);
        assert_eq!(
            s,
            "{\n  \"bad\": null,\n  \"characteristic\": 1.0000000000000000e0,\n  \"command\": \"ap\",\n  \"n\": 3,\n  \"schema\": 1\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["characteristic"], 1.0);
    }
}
