//! Deterministic JSON/CSV emission. Everything except measured timings is a
//! pure function of the run configuration and seed, so repeated runs write
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

/// Versioned JSON envelope: every document carries `"schema": 1`.
pub fn to_json<T: Serialize>(seed: u64, kind: &str, body: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        schema: u32,
        kind: &'a str,
        seed: u64,
        #[serde(flatten)]
        body: &'a T,
    }
    Ok(serde_json::to_string_pretty(&Envelope {
        schema: 1,
        kind,
        seed,
        body,
    })? + "\n")
}

/// CSV with a header row; fields are written with Rust's shortest
/// round-trip float formatting.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn write_out(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}
