//! Reading and writing parity-check matrices in alist format.
//!
//! ```text
//! n_cols n_rows
//! max_col_weight max_row_weight
//! <column weights>
//! <row weights>
//! <one line per column: 1-indexed rows, zero padded to max_col_weight>
//! <one line per row: 1-indexed columns, zero padded to max_row_weight>
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sparse::SparseBinMatrix;

fn join_padded(items: &[usize], width: usize) -> String {
    let mut parts: Vec<String> = items.iter().map(|i| (i + 1).to_string()).collect();
    parts.resize(width.max(items.len()).max(1), "0".to_string());
    parts.join(" ")
}

pub fn write_alist<W: Write>(h: &SparseBinMatrix, mut w: W) -> Result<()> {
    let max_col = h.cols().iter().map(Vec::len).max().unwrap_or(0);
    let max_row = h.rows().iter().map(Vec::len).max().unwrap_or(0);
    writeln!(w, "{} {}", h.n_cols(), h.n_rows())?;
    writeln!(w, "{max_col} {max_row}")?;
    let cw: Vec<String> = h.cols().iter().map(|c| c.len().to_string()).collect();
    writeln!(w, "{}", cw.join(" "))?;
    let rw: Vec<String> = h.rows().iter().map(|r| r.len().to_string()).collect();
    writeln!(w, "{}", rw.join(" "))?;
    for c in h.cols() {
        writeln!(w, "{}", join_padded(c, max_col))?;
    }
    for r in h.rows() {
        writeln!(w, "{}", join_padded(r, max_row))?;
    }
    Ok(())
}

pub fn to_alist_string(h: &SparseBinMatrix) -> String {
    let mut buf = Vec::new();
    write_alist(h, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("alist output is ASCII")
}

struct Lines<R> {
    inner: std::iter::Enumerate<std::io::Lines<R>>,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank line as numbers, with its 1-based line number.
    fn numbers(&mut self) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Alist {
                        line: i + 1,
                        msg: format!("'{t}' is not a non-negative integer"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(Error::Alist {
            line: 0,
            msg: "unexpected end of input".into(),
        })
    }
}

/// Parses an alist description. Column and row lists must agree.
pub fn read_alist<R: BufRead>(r: R) -> Result<SparseBinMatrix> {
    let mut lines = Lines {
        inner: r.lines().enumerate(),
    };
    let bad = |line: usize, msg: &str| Error::Alist {
        line,
        msg: msg.to_string(),
    };
    let (l, dims) = lines.numbers()?;
    let [n_cols, n_rows] = dims[..] else {
        return Err(bad(l, "expected 'n_cols n_rows'"));
    };
    let (l, maxes) = lines.numbers()?;
    if maxes.len() != 2 {
        return Err(bad(l, "expected 'max_col_weight max_row_weight'"));
    }
    let (l, col_w) = lines.numbers()?;
    if col_w.len() != n_cols {
        return Err(bad(l, "column weight count does not match n_cols"));
    }
    let (l, row_w) = lines.numbers()?;
    if row_w.len() != n_rows {
        return Err(bad(l, "row weight count does not match n_rows"));
    }
    let mut cols = Vec::with_capacity(n_cols);
    for &w in &col_w {
        let (l, entries) = lines.numbers()?;
        let list: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
        if list.len() != w {
            return Err(bad(l, "column list length disagrees with its weight"));
        }
        if list.iter().any(|&e| e > n_rows) {
            return Err(bad(l, "row index out of range"));
        }
        cols.push(list.into_iter().map(|e| e - 1).collect::<Vec<_>>());
    }
    let mut rows = Vec::with_capacity(n_rows);
    for &w in &row_w {
        let (l, entries) = lines.numbers()?;
        let list: Vec<usize> = entries.into_iter().filter(|&e| e != 0).collect();
        if list.len() != w {
            return Err(bad(l, "row list length disagrees with its weight"));
        }
        if list.iter().any(|&e| e > n_cols) {
            return Err(bad(l, "column index out of range"));
        }
        rows.push(list.into_iter().map(|e| e - 1).collect::<Vec<_>>());
    }
    let h = SparseBinMatrix::from_rows(n_cols, rows)?;
    for (c, mut list) in cols.into_iter().enumerate() {
        list.sort_unstable();
        if list != h.col(c) {
            return Err(bad(0, &format!("column {} disagrees with the row lists", c + 1)));
        }
    }
    Ok(h)
}
