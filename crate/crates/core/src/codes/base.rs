use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// The three circulant network-code ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ensemble {
    /// Parity region is the identity: relays only combine source packets.
    Ldgm,
    /// Parity region is lower triangular: relays may also combine earlier relay packets.
    LtLdpc,
    /// LDGM followed by differential encoding of each relay stream (zigzag parity blocks).
    EcLdgm,
}

impl Ensemble {
    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Ldgm => "ldgm",
            Ensemble::LtLdpc => "lt-ldpc",
            Ensemble::EcLdgm => "ec-ldgm",
        }
    }

    /// Whether relays in this ensemble listen to earlier relay packets.
    pub fn uses_relay_packets(self) -> bool {
        matches!(self, Ensemble::LtLdpc)
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ldgm" => Ok(Ensemble::Ldgm),
            "lt-ldpc" | "ltldpc" | "lt" => Ok(Ensemble::LtLdpc),
            "ec-ldgm" | "ecldgm" | "ec" => Ok(Ensemble::EcLdgm),
            other => Err(Error::Config(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// The m x 2m packet-participation matrix of one cooperation round.
///
/// Columns `0..systematic_cols` are source packets; column `systematic_cols + r`
/// is the relay (parity) packet of relay `r`. Every row carries its own
/// self-parity entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMatrix {
    n_rows: usize,
    n_cols: usize,
    systematic_cols: usize,
    entries: Vec<Vec<usize>>,
}

impl BaseMatrix {
    /// An m x 2m base with only the self-parity diagonal.
    pub fn diagonal(m: usize) -> Self {
        BaseMatrix {
            n_rows: m,
            n_cols: 2 * m,
            systematic_cols: m,
            entries: (0..m).map(|r| vec![m + r]).collect(),
        }
    }

    /// Builds an m x 2m base from per-row column lists. The self-parity column
    /// is added when absent.
    pub fn from_rows(m: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_dims(m, 2 * m, m, rows)
    }

    /// General constructor with explicit dimensions.
    pub fn with_dims(
        n_rows: usize,
        n_cols: usize,
        systematic_cols: usize,
        rows: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if rows.len() != n_rows {
            return Err(Error::InvalidBase(format!(
                "expected {n_rows} rows, got {}",
                rows.len()
            )));
        }
        if systematic_cols + n_rows > n_cols {
            return Err(Error::InvalidBase(
                "self-parity diagonal does not fit in the column range".into(),
            ));
        }
        let mut entries = Vec::with_capacity(n_rows);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.push(systematic_cols + r);
            row.sort_unstable();
            row.dedup();
            if let Some(&c) = row.last() {
                if c >= n_cols {
                    return Err(Error::InvalidBase(format!(
                        "row {r} references column {c} outside 0..{n_cols}"
                    )));
                }
            }
            entries.push(row);
        }
        Ok(BaseMatrix {
            n_rows,
            n_cols,
            systematic_cols,
            entries,
        })
    }

    /// Parses a dense 0/1 base where the self-parity diagonal must already be present.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let m = dense.len();
        let mut rows = Vec::with_capacity(m);
        for (r, row) in dense.iter().enumerate() {
            if row.len() != 2 * m {
                return Err(Error::InvalidBase(format!(
                    "row {r} has {} columns, expected {}",
                    row.len(),
                    2 * m
                )));
            }
            if row[m + r] == 0 {
                return Err(Error::InvalidBase(format!("row {r} lacks its self-parity entry")));
            }
            rows.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b != 0)
                    .map(|(c, _)| c)
                    .collect(),
            );
        }
        Self::from_rows(m, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn systematic_cols(&self) -> usize {
        self.systematic_cols
    }

    pub fn self_parity_col(&self, row: usize) -> usize {
        self.systematic_cols + row
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.entries[r]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.entries
    }

    pub fn is_nonzero(&self, r: usize, c: usize) -> bool {
        self.entries[r].binary_search(&c).is_ok()
    }

    /// Nonzero entries except the self-parity diagonal.
    pub fn off_diagonal_entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().enumerate().flat_map(move |(r, row)| {
            row.iter()
                .copied()
                .filter(move |&c| c != self.systematic_cols + r)
                .map(move |c| (r, c))
        })
    }

    /// True when every parity-region entry is on the self-parity diagonal.
    pub fn is_ldgm(&self) -> bool {
        self.off_diagonal_entries()
            .all(|(_, c)| c < self.systematic_cols)
    }

    /// True when the parity region is lower triangular.
    pub fn is_lower_triangular(&self) -> bool {
        self.off_diagonal_entries()
            .all(|(r, c)| c < self.systematic_cols || c <= self.systematic_cols + r)
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.n_cols];
        for row in &self.entries {
            for &c in row {
                w[c] += 1;
            }
        }
        w
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut d = vec![vec![0u8; self.n_cols]; self.n_rows];
        for (r, row) in self.entries.iter().enumerate() {
            for &c in row {
                d[r][c] = 1;
            }
        }
        d
    }
}

/// `p_{i,j} = i*j mod N`, the storage-free offset assignment.
pub fn offset_scheme(i: usize, j: usize, n: usize) -> usize {
    assert!(n >= 1, "block size must be positive");
    ((i as u128 * j as u128) % n as u128) as usize
}

/// Circulant offsets for the off-diagonal nonzero base entries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OffsetTable {
    offsets: BTreeMap<(usize, usize), usize>,
}

impl OffsetTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `p_{i,j} = ij mod N` for every off-diagonal nonzero entry of `base`.
    pub fn product_scheme(base: &BaseMatrix, n: usize) -> Self {
        let offsets = base
            .off_diagonal_entries()
            .map(|(r, c)| ((r, c), offset_scheme(r, c, n)))
            .collect();
        OffsetTable { offsets }
    }

    /// All offsets zero: every entry lifts to the identity (plain ANCC).
    pub fn identity(base: &BaseMatrix) -> Self {
        OffsetTable {
            offsets: base.off_diagonal_entries().map(|e| (e, 0)).collect(),
        }
    }

    /// Independent uniform offsets in `0..n`.
    pub fn random<R: rand::Rng + ?Sized>(base: &BaseMatrix, n: usize, rng: &mut R) -> Self {
        OffsetTable {
            offsets: base
                .off_diagonal_entries()
                .map(|e| (e, rng.random_range(0..n)))
                .collect(),
        }
    }

    pub fn insert(&mut self, row: usize, col: usize, offset: usize) {
        self.offsets.insert((row, col), offset);
    }

    pub fn get(&self, row: usize, col: usize) -> Option<usize> {
        self.offsets.get(&(row, col)).copied()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Offset of a nonzero entry; the self-parity diagonal is implicitly 0.
    pub(crate) fn lookup(&self, base: &BaseMatrix, row: usize, col: usize) -> Result<usize> {
        if col == base.self_parity_col(row) {
            return Ok(0);
        }
        self.get(row, col).ok_or(Error::MissingOffset { row, col })
    }
}

/// Checks the 4-cycle-free condition on a circulant-lifted base: no two rows and
/// two columns, all four entries nonzero, with
/// `p[i1][j2] - p[i1][j1] == p[i2][j2] - p[i2][j1] (mod N)`.
///
/// The self-parity diagonal is taken as the identity (offset 0).
pub fn girth6_condition(base: &BaseMatrix, offsets: &OffsetTable, n: usize) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidParameter("block size must be positive".into()));
    }
    let mut p: Vec<Vec<(usize, usize)>> = Vec::with_capacity(base.n_rows());
    for r in 0..base.n_rows() {
        let mut row = Vec::with_capacity(base.row(r).len());
        for &c in base.row(r) {
            row.push((c, offsets.lookup(base, r, c)? % n));
        }
        p.push(row);
    }
    for i1 in 0..p.len() {
        for i2 in i1 + 1..p.len() {
            // Difference of offsets on every shared column; two equal differences
            // close a length-4 cycle.
            let mut diffs = Vec::new();
            let (a, b) = (&p[i1], &p[i2]);
            let (mut x, mut y) = (0, 0);
            while x < a.len() && y < b.len() {
                match a[x].0.cmp(&b[y].0) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        diffs.push((a[x].1 + n - b[y].1) % n);
                        x += 1;
                        y += 1;
                    }
                }
            }
            diffs.sort_unstable();
            if diffs.windows(2).any(|w| w[0] == w[1]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_scheme_examples() {
        assert_eq!(offset_scheme(0, 5, 37), 0);
        assert_eq!(offset_scheme(3, 4, 37), 12);
        assert_eq!(offset_scheme(6, 7, 10), 2);
    }

    #[test]
    fn self_parity_is_always_present() {
        let b = BaseMatrix::from_rows(2, vec![vec![0], vec![]]).unwrap();
        assert_eq!(b.row(0), &[0, 2]);
        assert_eq!(b.row(1), &[3]);
        assert!(b.is_ldgm());
    }

    #[test]
    fn lower_triangular_detection() {
        let lt = BaseMatrix::from_rows(3, vec![vec![0], vec![1, 3], vec![3, 4]]).unwrap();
        assert!(lt.is_lower_triangular());
        assert!(!lt.is_ldgm());
        let upper = BaseMatrix::from_rows(3, vec![vec![4], vec![], vec![]]).unwrap();
        assert!(!upper.is_lower_triangular());
    }

    #[test]
    fn full_base_girth_condition() {
        let m = 5;
        let base = full_base(m);
        let offs = OffsetTable::product_scheme(&base, 37);
        assert!(girth6_condition(&base, &offs, 37).unwrap());
        let offs12 = OffsetTable::product_scheme(&base, 12);
        assert!(!girth6_condition(&base, &offs12, 12).unwrap());
    }

    #[test]
    fn single_row_is_trivially_fine() {
        let base = BaseMatrix::from_rows(1, vec![vec![0]]).unwrap();
        let offs = OffsetTable::product_scheme(&base, 3);
        assert!(girth6_condition(&base, &offs, 3).unwrap());
    }

    #[test]
    fn missing_offset_is_an_error() {
        let base = BaseMatrix::from_rows(2, vec![vec![0], vec![0]]).unwrap();
        let mut offs = OffsetTable::new();
        offs.insert(0, 0, 1);
        assert_eq!(
            girth6_condition(&base, &offs, 5),
            Err(Error::MissingOffset { row: 1, col: 0 })
        );
    }

    /// A 5x10 base that is nonzero everywhere, with the self-parity "diagonal"
    /// placed in a phantom column block so every real column carries p = ij.
    pub(crate) fn full_base(m: usize) -> BaseMatrix {
        BaseMatrix::with_dims(m, 3 * m, 2 * m, vec![(0..2 * m).collect(); m]).unwrap()
    }
}
