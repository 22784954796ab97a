//! MatrixMarket text I/O for dense real matrices.
//!
//! Reads `array` and `coordinate` files with `real` entries in `general` or
//! `symmetric` form; symmetric files are expanded to full storage. Writes
//! `array real general`, column-major, with shortest round-trip formatting.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest dense matrix accepted from a file.
pub const MM_MAX_ENTRIES: usize = crate::linalg::DEFAULT_KRON_CAP;

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Array,
    Coordinate,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<Matrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

pub(crate) fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let layout = match tokens[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(1, format!("unknown format '{other}'"))),
    };
    if tokens[3] != "real" {
        return Err(parse_err(1, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(size_line, format!("bad size token '{t}'"))))
        .collect::<Result<_>>()?;
    let expected = if layout == Layout::Array { 2 } else { 3 };
    if dims.len() != expected {
        return Err(parse_err(size_line, format!("size line needs {expected} integers")));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows == 0 || cols == 0 {
        return Err(parse_err(size_line, "empty matrix"));
    }
    if rows.checked_mul(cols).is_none_or(|e| e > MM_MAX_ENTRIES) {
        return Err(parse_err(size_line, format!("{rows}x{cols} exceeds {MM_MAX_ENTRIES} entries")));
    }
    if symmetric && rows != cols {
        return Err(parse_err(size_line, "symmetric matrix must be square"));
    }

    let mut m = Matrix::zeros(rows, cols);
    let parse_val = |line: usize, t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|_| parse_err(line, format!("bad value '{t}'")))?;
        if !v.is_finite() {
            return Err(parse_err(line, "non-finite value"));
        }
        Ok(v)
    };

    match layout {
        Layout::Array => {
            // column-major; symmetric files list the lower triangle only
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = if symmetric { j } else { 0 };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut count = 0;
            for (line, text) in body {
                for tok in text.split_whitespace() {
                    let &(i, j) = positions
                        .get(count)
                        .ok_or_else(|| parse_err(line, "more values than the size line declares"))?;
                    let v = parse_val(line, tok)?;
                    m[(i, j)] = v;
                    if symmetric {
                        m[(j, i)] = v;
                    }
                    count += 1;
                }
            }
            if count != positions.len() {
                return Err(parse_err(
                    size_line,
                    format!("expected {} values, found {count}", positions.len()),
                ));
            }
        }
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut count = 0;
            for (line, text) in body {
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(parse_err(line, "coordinate entries need 'row col value'"));
                }
                let idx = |t: &str, bound: usize| -> Result<usize> {
                    let k: usize = t.parse().map_err(|_| parse_err(line, format!("bad index '{t}'")))?;
                    if k == 0 || k > bound {
                        return Err(parse_err(line, format!("index {k} out of range 1..={bound}")));
                    }
                    Ok(k - 1)
                };
                let (i, j) = (idx(toks[0], rows)?, idx(toks[1], cols)?);
                let v = parse_val(line, toks[2])?;
                m[(i, j)] = v;
                if symmetric {
                    m[(j, i)] = v;
                }
                count += 1;
            }
            if count != nnz {
                return Err(parse_err(size_line, format!("declared {nnz} entries, found {count}")));
            }
        }
    }
    Ok(m)
}

pub fn write_matrix_market(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(format_matrix_market(m).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub(crate) fn format_matrix_market(m: &Matrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            // `{:?}` is the shortest representation that parses back exactly
            out.push_str(&format!("{:?}\n", m[(i, j)]));
        }
    }
    out
}
