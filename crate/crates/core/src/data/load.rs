//! File ingestion: delimited text and 1-based sparse `label idx:val` lines.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

use super::{Dataset, Features, Labels};

/// Options for [`load_delimited`].
#[derive(Debug, Clone)]
pub struct DelimitedOptions {
    /// Cell separator, default `,`.
    pub delimiter: char,
    /// Zero-based column holding the class label, if any.
    pub label_column: Option<usize>,
    /// Cell content marking a missing value (zero-imputed and flagged).
    pub missing_token: Option<String>,
    /// Whether the first row holds feature names.
    pub has_header: bool,
}

impl Default for DelimitedOptions {
    fn default() -> Self {
        DelimitedOptions {
            delimiter: ',',
            label_column: None,
            missing_token: None,
            has_header: false,
        }
    }
}

fn parse_cell(text: &str, line_no: usize) -> Result<f64> {
    let value: f64 = text.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("cell `{}` is not numeric", text.trim()),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("cell `{}` is not finite", text.trim()),
        });
    }
    Ok(value)
}

/// Re-encode raw numeric labels: two distinct values map to -1/+1 by
/// ascending order, anything else maps to contiguous ids 0..K.
fn encode_labels(raw: &[f64]) -> Labels {
    let mut distinct = raw.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() == 2 {
        Labels::Binary(
            raw.iter()
                .map(|&v| if v == distinct[0] { -1 } else { 1 })
                .collect(),
        )
    } else {
        let ids = raw
            .iter()
            .map(|v| distinct.binary_search_by(|p| p.total_cmp(v)).unwrap())
            .collect();
        Labels::Multiclass { ids, classes: distinct.len() }
    }
}

/// Load a delimited text file into a [`Dataset`].
///
/// Cells equal to the missing token become 0 with the missing mask set.
/// Label cells must always be present and numeric.
pub fn load_delimited<P: AsRef<Path>>(path: P, options: &DelimitedOptions) -> Result<Dataset> {
    let content = fs::read_to_string(path)?;
    let mut lines = content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let mut feature_names: Option<Vec<String>> = None;
    let header = if options.has_header { lines.next() } else { None };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut mask_rows: Vec<Vec<bool>> = Vec::new();
    let mut raw_labels: Vec<f64> = Vec::new();
    let mut ncols: Option<usize> = None;

    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(options.delimiter).collect();
        match ncols {
            None => ncols = Some(cells.len()),
            Some(c) if c != cells.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {c} columns, found {}", cells.len()),
                })
            }
            _ => {}
        }
        if let Some(lc) = options.label_column {
            if lc >= cells.len() {
                return Err(Error::Config(format!(
                    "label column {lc} out of range for {} columns",
                    cells.len()
                )));
            }
        }
        let mut row = Vec::with_capacity(cells.len());
        let mut mask = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            if Some(j) == options.label_column {
                raw_labels.push(parse_cell(cell, line_no)?);
                continue;
            }
            if options
                .missing_token
                .as_deref()
                .is_some_and(|tok| cell.trim() == tok)
            {
                row.push(0.0);
                mask.push(true);
            } else {
                row.push(parse_cell(cell, line_no)?);
                mask.push(false);
            }
        }
        rows.push(row);
        mask_rows.push(mask);
    }

    if rows.is_empty() {
        return Err(Error::Parse { line: 1, msg: "file contains no data rows".into() });
    }
    let m = rows[0].len();

    if let Some((line_no, line)) = header {
        let mut names: Vec<String> = line
            .split(options.delimiter)
            .map(|s| s.trim().to_string())
            .collect();
        if names.len() != m + usize::from(options.label_column.is_some()) {
            return Err(Error::Parse {
                line: line_no,
                msg: "header width differs from data rows".into(),
            });
        }
        if let Some(lc) = options.label_column {
            names.remove(lc);
        }
        feature_names = Some(names);
    }

    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let features = Array2::from_shape_vec((flat.len() / m, m), flat)
        .map_err(|e| Error::Data(e.to_string()))?;
    let any_missing = mask_rows.iter().flatten().any(|&b| b);
    let mask = any_missing.then(|| {
        Array2::from_shape_vec(
            (mask_rows.len(), m),
            mask_rows.into_iter().flatten().collect(),
        )
        .expect("mask shape follows feature shape")
    });
    let labels = options.label_column.map(|_| encode_labels(&raw_labels));

    Dataset::new(Features::Dense(features), labels, feature_names, mask)
}

/// Load a sparse `label index:value ...` file (1-based, strictly increasing
/// indices). The feature dimension is the largest index seen; unlisted
/// entries are exact zeros, not missing values.
pub fn load_sparse_indexed<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    let content = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut raw_labels: Vec<f64> = Vec::new();
    let mut max_index = 0usize;

    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        raw_labels.push(parse_cell(label_tok, line_no)?);

        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut last_index = 0usize;
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected index:value pair, found `{tok}`"),
            })?;
            let idx: usize = idx_str.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("index `{idx_str}` is not a positive integer"),
            })?;
            if idx < 1 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "indices are 1-based; found 0".into(),
                });
            }
            if idx <= last_index {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("index {idx} does not increase past {last_index}"),
                });
            }
            let val = parse_cell(val_str, line_no)?;
            row.push((idx - 1, val));
            last_index = idx;
            max_index = max_index.max(idx);
        }
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::Parse { line: 1, msg: "file contains no data rows".into() });
    }

    let labels = encode_labels(&raw_labels);
    Dataset::new(
        Features::Sparse { rows, dim: max_index },
        Some(labels),
        None,
        None,
    )
}
