//! The hypermatrix text format and related serializations.
//!
//! ```text
//! # optional comment lines start with '#'
//! dims: 4 2 2 3
//! 0 0 0 ...           <- whitespace-separated values in vector-form order
//! ```
//!
//! Writers emit 17 significant digits so that every `f64` round-trips.
//! A matrix may also be given as plain whitespace rows (one matrix row per
//! line, no header). Permutation maps serialize as `permmap: n` followed by
//! the 1-based destination list.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::matrix::Matrix;
use crate::stp::PermutationMap;
use crate::tensor::{Hypermatrix, Shape};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("reading {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Formats with 17 significant digits (round-trip safe for `f64`).
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn is_comment(line: &str) -> bool {
    line.trim_start().starts_with('#')
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !is_comment(l))
}

fn parse_header<'a>(
    line_no: usize,
    line: &'a str,
    key: &str,
) -> Result<impl Iterator<Item = &'a str>, IoError> {
    let rest = line
        .trim()
        .strip_prefix(key)
        .ok_or_else(|| parse_err(line_no, format!("expected `{key}` header")))?;
    Ok(rest.split_whitespace())
}

pub fn parse_hypermatrix(text: &str) -> Result<Hypermatrix, IoError> {
    let mut lines = content_lines(text);
    let (dims_line_no, dims_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty input: missing `dims:` line"))?;
    let mut dims = Vec::new();
    for tok in parse_header(dims_line_no, dims_line, "dims:")? {
        let d: usize = tok
            .parse()
            .map_err(|_| parse_err(dims_line_no, format!("bad dimension `{tok}`")))?;
        dims.push(d);
    }
    let shape = Shape::new(dims).map_err(|e| parse_err(dims_line_no, e.to_string()))?;

    let mut values = Vec::with_capacity(shape.total());
    for (line_no, line) in lines {
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad value `{tok}`")))?;
            values.push(v);
            if values.len() > shape.total() {
                return Err(parse_err(
                    line_no,
                    format!("more than {} values for the declared dims", shape.total()),
                ));
            }
        }
    }
    if values.len() != shape.total() {
        return Err(parse_err(
            0,
            format!("expected {} values, found {}", shape.total(), values.len()),
        ));
    }
    Hypermatrix::new(shape, values).map_err(|e| parse_err(0, e.to_string()))
}

pub fn format_hypermatrix(h: &Hypermatrix) -> String {
    let mut out = String::new();
    out.push_str("dims:");
    for d in h.shape().dims() {
        let _ = write!(out, " {d}");
    }
    out.push('\n');
    // One line per trailing-axis run keeps the file human-scannable.
    let run = *h.shape().dims().last().expect("shape has at least one axis");
    for chunk in h.values().chunks(run) {
        let line: Vec<String> = chunk.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_hypermatrix(path: &Path) -> Result<Hypermatrix, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_hypermatrix(&text)
}

/// Parses a matrix either from the hypermatrix format with exactly two axes
/// or from plain whitespace rows (one row per line).
pub fn parse_matrix(text: &str) -> Result<Matrix, IoError> {
    let starts_with_dims = content_lines(text)
        .next()
        .is_some_and(|(_, l)| l.trim_start().starts_with("dims:"));
    if starts_with_dims {
        let h = parse_hypermatrix(text)?;
        if h.shape().order() != 2 {
            return Err(parse_err(
                1,
                format!("matrix input needs 2 axes, got {}", h.shape().order()),
            ));
        }
        let dims = h.shape().dims();
        return Matrix::new(dims[0], dims[1], h.values().to_vec())
            .map_err(|e| parse_err(0, e.to_string()));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in content_lines(text) {
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad value `{tok}`")))?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    line_no,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "empty input: no matrix rows"));
    }
    Matrix::from_rows(&rows).map_err(|e| parse_err(0, e.to_string()))
}

pub fn read_matrix(path: &Path) -> Result<Matrix, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text)
}

pub fn format_permutation_map(map: &PermutationMap) -> String {
    let mut out = format!("permmap: {}\n", map.size());
    let dest: Vec<String> = map.dest().iter().map(usize::to_string).collect();
    out.push_str(&dest.join(" "));
    out.push('\n');
    out
}

pub fn parse_permutation_map(text: &str) -> Result<PermutationMap, IoError> {
    let mut lines = content_lines(text);
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty input: missing `permmap:` line"))?;
    let mut toks = parse_header(line_no, header, "permmap:")?;
    let n: usize = toks
        .next()
        .ok_or_else(|| parse_err(line_no, "missing size"))?
        .parse()
        .map_err(|_| parse_err(line_no, "bad size"))?;

    let mut dest = Vec::with_capacity(n);
    for (line_no, line) in lines {
        for tok in line.split_whitespace() {
            let v: usize = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad position `{tok}`")))?;
            dest.push(v);
        }
    }
    if dest.len() != n {
        return Err(parse_err(
            0,
            format!("expected {n} destinations, found {}", dest.len()),
        ));
    }
    PermutationMap::from_dest(dest).map_err(|e| parse_err(0, e.to_string()))
}
