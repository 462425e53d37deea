//! Classification dataset ingestion.
//!
//! Two text formats are accepted:
//!
//! - sparse: `label idx:val idx:val ...` with one-based feature indices
//!   (the LIBSVM layout);
//! - dense: delimiter-separated values with the label in the first column.
//!   The delimiter is detected from the first data line: comma, then tab,
//!   otherwise runs of spaces.
//!
//! Blank lines and lines starting with `#` are skipped. Raw labels are
//! mapped to ±1: when exactly two distinct values occur the larger one
//! becomes `+1`; otherwise positive labels become `+1` and the rest `−1`.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    Sparse,
    Dense,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" | "libsvm" | "sparse-index-value" => Ok(DatasetFormat::Sparse),
            "dense" | "csv" | "dense-delimited" => Ok(DatasetFormat::Dense),
            other => Err(Error::config(format!("unknown dataset format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataRow {
    /// Nonzero features as `(zero-based index, value)`, sorted by index.
    pub features: Vec<(usize, f64)>,
    pub raw_label: f64,
    /// Normalised label, `+1.0` or `−1.0`.
    pub label: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecords {
    pub rows: Vec<DataRow>,
    /// Feature dimension `n`.
    pub dim: usize,
}

impl DatasetRecords {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Dense copy of row `i`'s features.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(j, v) in &self.rows[i].features {
            out[j] = v;
        }
        out
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<DatasetRecords> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, format, &path.display().to_string())
}

/// Parses dataset text; `origin` names the source in error messages.
pub fn parse_dataset(text: &str, format: DatasetFormat, origin: &str) -> Result<DatasetRecords> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let data_lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut rows = Vec::new();
    let mut dim = 0usize;
    match format {
        DatasetFormat::Sparse => {
            for (lineno, line) in data_lines {
                let mut tokens = line.split_whitespace();
                let label_tok = tokens.next().expect("nonempty line");
                let raw_label = parse_label(label_tok).map_err(|m| err(lineno, m))?;
                let mut features = Vec::new();
                for tok in tokens {
                    let (idx, val) = tok
                        .split_once(':')
                        .ok_or_else(|| err(lineno, format!("expected idx:val, found '{tok}'")))?;
                    let idx: usize = idx
                        .parse()
                        .map_err(|_| err(lineno, format!("bad feature index '{idx}'")))?;
                    if idx == 0 {
                        return Err(err(lineno, "feature indices are one-based".into()));
                    }
                    let val: f64 = val
                        .parse()
                        .map_err(|_| err(lineno, format!("bad feature value '{val}'")))?;
                    if !val.is_finite() {
                        return Err(err(lineno, format!("non-finite feature value '{val}'")));
                    }
                    dim = dim.max(idx);
                    features.push((idx - 1, val));
                }
                features.sort_by_key(|&(j, _)| j);
                if features.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(err(lineno, "duplicate feature index".into()));
                }
                rows.push(DataRow {
                    features,
                    raw_label,
                    label: 0.0,
                });
            }
        }
        DatasetFormat::Dense => {
            let mut delim: Option<Option<char>> = None;
            for (lineno, line) in data_lines {
                let d = *delim.get_or_insert_with(|| detect_delimiter(line));
                let fields: Vec<&str> = match d {
                    Some(c) => line.split(c).map(str::trim).collect(),
                    None => line.split_whitespace().collect(),
                };
                let raw_label = parse_label(fields[0]).map_err(|m| err(lineno, m))?;
                let width = fields.len() - 1;
                if rows.is_empty() {
                    dim = width;
                } else if width != dim {
                    return Err(err(lineno, format!("expected {dim} features, found {width}")));
                }
                let mut features = Vec::new();
                for (j, f) in fields[1..].iter().enumerate() {
                    let v: f64 = f
                        .parse()
                        .map_err(|_| err(lineno, format!("bad feature value '{f}'")))?;
                    if !v.is_finite() {
                        return Err(err(lineno, format!("non-finite feature value '{f}'")));
                    }
                    if v != 0.0 {
                        features.push((j, v));
                    }
                }
                rows.push(DataRow {
                    features,
                    raw_label,
                    label: 0.0,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(origin.to_string()));
    }
    normalize_labels(&mut rows);
    Ok(DatasetRecords { rows, dim })
}

fn parse_label(tok: &str) -> std::result::Result<f64, String> {
    let tok = tok.strip_prefix('+').unwrap_or(tok);
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("label '{tok}' is not a finite number")),
    }
}

fn detect_delimiter(line: &str) -> Option<char> {
    if line.contains(',') {
        Some(',')
    } else if line.contains('\t') {
        Some('\t')
    } else {
        None
    }
}

fn normalize_labels(rows: &mut [DataRow]) {
    let mut distinct: Vec<f64> = rows.iter().map(|r| r.raw_label).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if let [_, hi] = distinct[..] {
        for r in rows.iter_mut() {
            r.label = if r.raw_label == hi { 1.0 } else { -1.0 };
        }
    } else {
        for r in rows.iter_mut() {
            r.label = if r.raw_label > 0.0 { 1.0 } else { -1.0 };
        }
    }
}
