//! Text point-set format: a header line `n d`, then `n` lines of `d` coordinates.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::PointSet;
use crate::error::{Error, Result};

pub fn to_text(points: &PointSet) -> String {
    let mut out = format!("{} {}\n", points.len(), points.dim());
    for p in points.points() {
        let line: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn parse_text(text: &str, origin: &Path) -> Result<PointSet> {
    let bad = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let mut fields = header.split_whitespace();
    let n: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| bad("header must be `n d`".into()))?;
    let d: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| bad("header must be `n d`".into()))?;
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("expected {n} points, found {i}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("point {i}: {e}")))?;
        if row.len() != d {
            return Err(bad(format!(
                "point {i} has {} coordinates, expected {d}",
                row.len()
            )));
        }
        coords.extend(row);
    }
    PointSet::from_flat(d, coords).map_err(|e| bad(e.to_string()))
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_text(&text, path)
}

pub fn write_points(path: &Path, points: &PointSet) -> Result<()> {
    fs::write(path, to_text(points)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads the `NODE_COORD_SECTION` of a TSPLIB file (2-D or 3-D coordinates).
pub fn parse_tsplib(text: &str, origin: &Path) -> Result<PointSet> {
    let bad = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let mut in_coords = false;
    let mut dim = None;
    let mut coords = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("NODE_COORD_SECTION") {
            in_coords = true;
            continue;
        }
        if line == "EOF" {
            break;
        }
        if !in_coords {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .skip(1)
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("coordinate line `{line}`: {e}")))?;
        match dim {
            None => dim = Some(fields.len()),
            Some(d) if d != fields.len() => {
                return Err(bad("inconsistent coordinate count".into()))
            }
            _ => {}
        }
        coords.extend(fields);
    }
    let dim = dim.ok_or_else(|| bad("no NODE_COORD_SECTION entries".into()))?;
    PointSet::from_flat(dim, coords).map_err(|e| bad(e.to_string()))
}
