//! Canonical report output: JSON with sorted keys and floats at six
//! significant digits, so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::similarity::PairScore;

/// `%g`-style formatting at six significant digits.
pub fn format_float(v: f64) -> Option<String> {
    if !v.is_finite() {
        return None;
    }
    if v == 0.0 {
        return Some("0".into());
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    Some(if (-4..6).contains(&exp) {
        trim(&format!("{:.*}", (5 - exp) as usize, v))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    })
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                match n.as_f64().and_then(format_float) {
                    Some(s) => out.push_str(&s),
                    None => out.push_str("null"),
                }
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push_str("{\n");
            for (i, (k, item)) in sorted.iter().enumerate() {
                pad(out, indent + 2);
                let _ = write!(
                    out,
                    "{}: ",
                    serde_json::to_string(k).expect("key serializes")
                );
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < sorted.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Canonical JSON text of `value`, with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::json("report", e))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_bytes(&bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub command: Vec<String>,
    pub config: Value,
    pub tool_version: String,
    /// Input file (as given on the command line) to its sha256.
    pub input_digests: BTreeMap<String, String>,
    pub result: Value,
}

impl ReportBundle {
    pub fn new<C: Serialize, R: Serialize>(
        command: Vec<String>,
        config: &C,
        result: &R,
    ) -> Result<Self> {
        Ok(ReportBundle {
            command,
            config: serde_json::to_value(config).map_err(|e| Error::json("report config", e))?,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digests: BTreeMap::new(),
            result: serde_json::to_value(result).map_err(|e| Error::json("report result", e))?,
        })
    }

    pub fn digest(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.input_digests
            .insert(path.display().to_string(), digest);
        Ok(())
    }
}

/// Writes the bundle as canonical JSON and returns the byte count.
pub fn emit_report(bundle: &ReportBundle, path: &Path) -> Result<usize> {
    let text = to_canonical_json(bundle)?;
    std::fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    Ok(text.len())
}

/// Square project-by-project score matrix with a header row and column of
/// project ids. Each pair fills `[a][b]`; for symmetric scores `[b][a]` too.
/// The diagonal is 1 and missing pairs are empty.
pub fn heatmap_csv(ids: &[String], pairs: &[PairScore], symmetric: bool) -> Vec<u8> {
    let n = ids.len();
    let pos: BTreeMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut cells = vec![vec![String::new(); n]; n];
    for (i, row) in cells.iter_mut().enumerate() {
        row[i] = "1".into();
    }
    for p in pairs {
        if let (Some(&a), Some(&b)) = (pos.get(p.a.as_str()), pos.get(p.b.as_str())) {
            let s = format_float(p.score).unwrap_or_default();
            if symmetric {
                cells[b][a] = s.clone();
            }
            cells[a][b] = s;
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("project").chain(ids.iter().map(String::as_str));
    w.write_record(header).expect("in-memory write");
    for (id, row) in ids.iter().zip(cells) {
        w.write_record(std::iter::once(id.clone()).chain(row))
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
