//! Plain-text matrix files.
//!
//! First line `rows cols`, then one line per row with `re,im` entries separated by
//! whitespace. Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every bit.

use std::fmt::Write as _;
use std::path::Path;

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|z| format!("{:?},{:?}", z.re, z.im)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing 'rows cols' header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line: hline,
            message: format!("bad dimension '{s}'"),
        })
    };
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            message: "header must be 'rows cols'".into(),
        });
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            line: hline,
            message: "dimensions must be positive".into(),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut last_line = hline;
    for r in 0..rows {
        let (lno, line) = lines.next().ok_or(Error::Parse {
            line: last_line + 1,
            message: format!("expected {rows} rows, found {r}"),
        })?;
        last_line = lno;
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != cols {
            return Err(Error::Parse {
                line: lno,
                message: format!("expected {cols} entries, found {}", entries.len()),
            });
        }
        for e in entries {
            data.push(parse_entry(e).ok_or_else(|| Error::Parse {
                line: lno,
                message: format!("bad entry '{e}', expected 're,im'"),
            })?);
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(Error::Parse {
            line: lno,
            message: "trailing content after the last row".into(),
        });
    }
    ComplexMatrix::from_vec(rows, cols, data).map_err(|e| Error::Parse {
        line: hline,
        message: e.to_string(),
    })
}

fn parse_entry(s: &str) -> Option<C64> {
    let (re, im) = s.split_once(',')?;
    let re: f64 = re.parse().ok()?;
    let im: f64 = im.parse().ok()?;
    (re.is_finite() && im.is_finite()).then(|| C64::new(re, im))
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}
