//! Minimal numeric CSV tables. Floats are written with the shortest
//! round-trip `Debug` formatting (exponent form for tiny values), so reading
//! a table back is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn format_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").expect("write to String");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_csv(header, rows)).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Parses a table written by [`format_csv`]; empty cells read as NaN.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Schema("empty CSV".into()))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let row = line
            .split(',')
            .map(|cell| {
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse::<f64>()
                        .map_err(|_| Error::Schema(format!("row {}: cannot parse {cell:?}", n + 1)))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Schema(format!("row {} has {} cells, header has {}", n + 1, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_csv(&text)
}
