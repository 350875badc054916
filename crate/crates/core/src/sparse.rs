//! Sparse binary matrices over GF(2), stored as row and column adjacency lists.

use crate::error::{Error, Result};

/// A sparse GF(2) matrix. Every row keeps a sorted list of the columns holding a
/// 1, and the column lists are kept as the exact inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl SparseBinMatrix {
    /// An all-zero matrix.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseBinMatrix {
            n_rows,
            n_cols,
            rows: vec![Vec::new(); n_rows],
            cols: vec![Vec::new(); n_cols],
        }
    }

    /// Builds a matrix from per-row column lists. Duplicate entries within a row
    /// cancel pairwise, as they would in GF(2).
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let n_rows = rows.len();
        let mut cols = vec![Vec::new(); n_cols];
        let mut clean = Vec::with_capacity(n_rows);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            let mut kept: Vec<usize> = Vec::with_capacity(row.len());
            for c in row {
                if c >= n_cols {
                    return Err(Error::Dimension(format!(
                        "row {r} has column {c} but the matrix has {n_cols} columns"
                    )));
                }
                if kept.last() == Some(&c) {
                    kept.pop();
                } else {
                    kept.push(c);
                }
            }
            for &c in &kept {
                cols[c].push(r);
            }
            clean.push(kept);
        }
        Ok(SparseBinMatrix {
            n_rows,
            n_cols,
            rows: clean,
            cols,
        })
    }

    /// Builds a matrix from a dense 0/1 description.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let n_cols = dense.first().map_or(0, Vec::len);
        let rows = dense
            .iter()
            .map(|r| {
                if r.len() != n_cols {
                    return Err(Error::Dimension("ragged dense matrix".into()));
                }
                Ok(r.iter()
                    .enumerate()
                    .filter(|(_, &b)| b != 0)
                    .map(|(c, _)| c)
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(n_cols, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].binary_search(&c).is_ok()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut d = vec![vec![0u8; self.n_cols]; self.n_rows];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                d[r][c] = 1;
            }
        }
        d
    }

    /// Per-row XOR of `bits` over the row support.
    pub fn syndrome_bits(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.n_cols {
            return Err(Error::Dimension(format!(
                "word has {} bits, matrix has {} columns",
                bits.len(),
                self.n_cols
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)))
            .collect())
    }

    /// True iff `bits` is a codeword.
    pub fn syndrome_is_zero(&self, bits: &[u8]) -> Result<bool> {
        Ok(self.syndrome_bits(bits)?.iter().all(|&s| s == 0))
    }

    /// Stacks `self` above `other`. Both must have the same column count.
    pub fn vstack(&self, other: &SparseBinMatrix) -> Result<SparseBinMatrix> {
        if self.n_cols != other.n_cols {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns on {} columns",
                self.n_cols, other.n_cols
            )));
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Self::from_rows(self.n_cols, rows)
    }

    /// Keeps only the rows in `range`.
    pub fn row_slice(&self, range: std::ops::Range<usize>) -> SparseBinMatrix {
        let rows = self.rows[range].to_vec();
        // Rows are already sorted and duplicate free.
        Self::from_rows(self.n_cols, rows).expect("row slice of a valid matrix")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_is_consistent() {
        let h = SparseBinMatrix::from_rows(4, vec![vec![0, 2], vec![1, 2, 3], vec![]]).unwrap();
        assert_eq!(h.col(2), &[0, 1]);
        assert_eq!(h.col(0), &[0]);
        assert_eq!(h.nnz(), 5);
        for (r, row) in h.rows().iter().enumerate() {
            for &c in row {
                assert!(h.col(c).contains(&r));
            }
        }
    }

    #[test]
    fn duplicate_entries_cancel() {
        let h = SparseBinMatrix::from_rows(3, vec![vec![1, 0, 1]]).unwrap();
        assert_eq!(h.row(0), &[0]);
    }

    #[test]
    fn out_of_range_column_is_rejected() {
        assert!(SparseBinMatrix::from_rows(2, vec![vec![2]]).is_err());
    }

    #[test]
    fn syndrome_checks_dimension() {
        let h = SparseBinMatrix::from_rows(3, vec![vec![0, 1, 2]]).unwrap();
        assert!(h.syndrome_is_zero(&[1, 1, 0]).unwrap());
        assert!(!h.syndrome_is_zero(&[1, 0, 0]).unwrap());
        assert!(h.syndrome_bits(&[0, 0]).is_err());
    }
}
