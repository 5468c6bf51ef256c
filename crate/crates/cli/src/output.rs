//! Human-readable number formatting and JSON-lines record files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: &str = "jsr-records";
pub const SCHEMA_VERSION: u32 = 1;

/// `x` with 12 significant digits, trailing zeros dropped.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-4..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        format!("{:.11e}", x)
    };
    trim_zeros(&s)
}

fn trim_zeros(s: &str) -> String {
    let (mant, exp) = match s.find('e') {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    format!("{mant}{exp}")
}

/// Writes a header line followed by one JSON object per row.
pub fn write_records<R: Serialize>(
    path: &Path,
    command: &str,
    parameters: Value,
    wall_clock_s: f64,
    rows: impl IntoIterator<Item = (&'static str, R)>,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    let header = json!({
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "tool": env!("CARGO_PKG_NAME"),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "parameters": parameters,
        "wall_clock_s": wall_clock_s,
    });
    writeln!(out, "{header}")?;
    for (kind, row) in rows {
        let mut v = serde_json::to_value(row)?;
        match v.as_object_mut() {
            Some(obj) => {
                obj.insert("kind".into(), Value::String(kind.into()));
            }
            None => v = json!({ "kind": kind, "value": v }),
        }
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}
