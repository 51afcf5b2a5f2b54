//! File plumbing: bodies from JSON (inline or on disk), node sets as CSV
//! with an `x1,...,xd` header, reports as pretty-printed JSON.
//!
//! Floats are written with the shortest round-trip representation, so a
//! written artifact re-read through these helpers reproduces the exact same
//! values and repeated runs are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use isorec::error::{IsorecError, Result};
use isorec::{ConvexBody, NodeSet, Scalar};

/// Parse a body from inline JSON (an argument starting with `{`) or from a
/// file path.
pub fn load_body(arg: &str) -> Result<ConvexBody> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg)?
    };
    let body: ConvexBody = serde_json::from_str(&text)
        .map_err(|e| IsorecError::Parameter(format!("body JSON: {e}")))?;
    body.validate()?;
    Ok(body)
}

pub fn nodes_to_csv(xi: &NodeSet) -> String {
    let d = xi.dim();
    let mut out = String::new();
    for j in 0..d {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&format!("x{}", j + 1));
    }
    out.push('\n');
    for p in xi.iter() {
        for (j, c) in p.iter().enumerate().take(d) {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{c}"));
        }
        out.push('\n');
    }
    out
}

pub fn nodes_from_csv(text: &str) -> Result<NodeSet> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| IsorecError::Parameter("node CSV is empty".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let d = cols.len();
    for (i, c) in cols.iter().enumerate() {
        let want = format!("x{}", i + 1);
        if c.trim() != want {
            return Err(IsorecError::Parameter(format!(
                "node CSV header column {} is {c:?}, expected {want:?}",
                i + 1
            )));
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != d {
            return Err(IsorecError::Parameter(format!(
                "node CSV row {} has {} columns, expected {d}",
                i + 2,
                cells.len()
            )));
        }
        let mut p = Vec::with_capacity(d);
        for cell in cells {
            let v: Scalar = cell.trim().parse().map_err(|_| {
                IsorecError::Parameter(format!("node CSV row {}: bad number {cell:?}", i + 2))
            })?;
            p.push(v);
        }
        points.push(p);
    }
    NodeSet::from_points(d, points)
}

pub fn load_nodes(path: &Path) -> Result<NodeSet> {
    nodes_from_csv(&fs::read_to_string(path)?)
}

/// Output directory: explicit flag, then `ISOREC_OUT`, then `./isorec-out`.
pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("ISOREC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("isorec-out"))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    s.push('\n');
    Ok(s)
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(path)
}
