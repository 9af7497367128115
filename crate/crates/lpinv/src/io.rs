//! Matrix CSV files and JSON output.
//!
//! A matrix file starts with a `# rows=<m> cols=<n>` header, followed by one
//! comma-separated row per line. Values are written with Rust's shortest
//! round-trip formatting, so reading a written file is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lpinv_core::DenseMatrix;
use serde::Serialize;

use crate::error::{AppError, AppResult};

pub fn format_matrix(a: &DenseMatrix) -> String {
    let (m, n) = a.shape();
    let mut out = String::with_capacity(16 + m * n * 24);
    let _ = writeln!(out, "# rows={m} cols={n}");
    for i in 0..m {
        for (j, v) in a.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

/// Parses the matrix format; `origin` names the source in error messages.
pub fn parse_matrix(text: &str, origin: &str) -> AppResult<DenseMatrix> {
    let err = |line: usize, msg: String| AppError::Format { path: origin.to_string(), line, msg };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let (m, n) = parse_header(header).ok_or_else(|| err(hline + 1, format!("expected `# rows=<m> cols=<n>`, got {header:?}")))?;
    let mut data = Vec::with_capacity(m * n);
    let mut rows = 0;
    for (idx, line) in lines {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| err(idx + 1, format!("not a number: {:?}", field.trim())))?;
            data.push(v);
        }
        if data.len() - before != n {
            return Err(err(idx + 1, format!("expected {n} values, found {}", data.len() - before)));
        }
        rows += 1;
    }
    if rows != m {
        return Err(err(hline + 1, format!("header declares {m} rows, found {rows}")));
    }
    Ok(DenseMatrix::new(m, n, data)?)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.trim().strip_prefix('#')?;
    let mut rows = None;
    let mut cols = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("rows=") {
            rows = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("cols=") {
            cols = v.parse().ok();
        }
    }
    Some((rows?, cols?))
}

pub fn read_matrix(path: &Path) -> AppResult<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_matrix(&text, &path.display().to_string())
}

pub fn write_matrix(path: &Path, a: &DenseMatrix) -> AppResult<()> {
    write_text(path, &format_matrix(a))
}

pub fn write_text(path: &Path, text: &str) -> AppResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Writes `rows` as CSV with a header derived from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> AppResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))?;
    Ok(())
}

/// 0/1 grid of entries whose magnitude exceeds `rel · max|X|`, one matrix row
/// per line, space-separated (gnuplot `matrix` format).
pub fn support_pattern(x: &DenseMatrix, rel: f64) -> String {
    let cut = rel * x.max_abs();
    let mut out = String::with_capacity(x.rows() * (2 * x.cols() + 1));
    for i in 0..x.rows() {
        for (j, v) in x.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            out.push(if v.abs() > cut { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let a = DenseMatrix::from_rows(&[&[0.1, -2.0, 1e-300], &[f64::MAX, 3.0, -0.0]]).unwrap();
        let text = format_matrix(&a);
        assert!(text.starts_with("# rows=2 cols=3\n"));
        let b = parse_matrix(&text, "mem").unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(matches!(parse_matrix("", "x"), Err(AppError::Format { line: 1, .. })));
        assert!(matches!(parse_matrix("1,2\n", "x"), Err(AppError::Format { .. })));
        assert!(matches!(parse_matrix("# rows=1 cols=2\n1,zz\n", "x"), Err(AppError::Format { line: 2, .. })));
        assert!(matches!(parse_matrix("# rows=1 cols=2\n1,2,3\n", "x"), Err(AppError::Format { line: 2, .. })));
        assert!(matches!(parse_matrix("# rows=2 cols=2\n1,2\n", "x"), Err(AppError::Format { .. })));
        assert!(matches!(parse_matrix("# rows=1 cols=1\nNaN\n", "x"), Err(AppError::Core(_))));
    }

    #[test]
    fn pattern_marks_entries_above_threshold() {
        let x = DenseMatrix::from_rows(&[&[1.0, 1e-12], &[0.0, -0.5]]).unwrap();
        assert_eq!(support_pattern(&x, 1e-8), "1 0\n0 1\n");
    }
}
