//! Plain numeric CSV with a header row. Cells must parse as finite
//! numbers; errors carry the offending row and column.

use std::path::Path;

use base_learners::Dataset;
use tensor_autodiff::Matrix;

use crate::error::{Error, Result};

fn split_header(line: &str) -> Vec<String> {
    line.split(',').map(|s| s.trim().to_string()).collect()
}

fn parse_rows(path: &Path, text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = match lines.next() {
        Some(h) => split_header(h),
        None => return Err(Error::EmptyFile { path: path.to_path_buf() }),
    };
    let width = header.len();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row_number = i + 1; // 1-based data row
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != width {
            return Err(Error::FieldCount {
                path: path.to_path_buf(),
                row: row_number,
                got: cells.len(),
                expected: width,
            });
        }
        let mut parsed = Vec::with_capacity(width);
        for (c, cell) in cells.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                path: path.to_path_buf(),
                row: row_number,
                column: header[c].clone(),
                value: (*cell).to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonNumericCell {
                    path: path.to_path_buf(),
                    row: row_number,
                    column: header[c].clone(),
                    value: (*cell).to_string(),
                });
            }
            parsed.push(value);
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile { path: path.to_path_buf() });
    }
    Ok((header, rows))
}

/// Loads a dataset. Features are all non-target columns in header order.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let (header, rows) = parse_rows(path, &text)?;
    let target_idx = header.iter().position(|c| c == target_column).ok_or_else(|| {
        Error::MissingTarget {
            path: path.to_path_buf(),
            target: target_column.to_string(),
            available: header.clone(),
        }
    })?;

    let feature_names: Vec<String> =
        header.iter().enumerate().filter(|(i, _)| *i != target_idx).map(|(_, c)| c.clone()).collect();
    let n = rows.len();
    let d = feature_names.len();
    let mut features = Vec::with_capacity(n * d);
    let mut target = Vec::with_capacity(n);
    for row in &rows {
        for (i, &v) in row.iter().enumerate() {
            if i == target_idx {
                target.push(v);
            } else {
                features.push(v);
            }
        }
    }
    let features = Matrix::from_vec(n, d, features).map_err(|e| Error::stage("load", e))?;
    Dataset::new(features, target, feature_names).map_err(|e| Error::stage("load", e))
}

/// Loads only the named feature columns, in the given order. Extra
/// columns (including any target) are ignored; missing ones error.
pub fn load_features_csv(path: impl AsRef<Path>, feature_columns: &[String]) -> Result<Matrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let (header, rows) = parse_rows(path, &text)?;
    let mut indices = Vec::with_capacity(feature_columns.len());
    for name in feature_columns {
        let idx = header.iter().position(|c| c == name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            name: name.clone(),
            available: header.clone(),
        })?;
        indices.push(idx);
    }
    let n = rows.len();
    let mut data = Vec::with_capacity(n * indices.len());
    for row in &rows {
        for &idx in &indices {
            data.push(row[idx]);
        }
    }
    Matrix::from_vec(n, indices.len(), data).map_err(|e| Error::stage("load", e))
}

/// Writes a numeric CSV with full-precision values.
pub fn write_csv(
    path: impl AsRef<Path>,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
