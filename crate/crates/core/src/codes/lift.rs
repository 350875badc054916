use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::base::{BaseMatrix, Ensemble, OffsetTable};
use crate::error::{Error, Result};
use crate::sparse::SparseBinMatrix;

/// Substitution for one base-matrix entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockKind {
    Zero,
    /// Row `r` has its single 1 at column `(r + p) mod N`.
    Circulant(usize),
    /// Row `r` has 1s at columns `r` and `r - 1`; row 0 only at column 0.
    Zigzag,
    /// Row `r` has its single 1 at column `perm[r]`.
    Permutation(Arc<[usize]>),
}

/// An N x N block of a lifted parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirculantBlock {
    size: usize,
    kind: BlockKind,
}

impl CirculantBlock {
    pub fn zero(size: usize) -> Self {
        CirculantBlock {
            size,
            kind: BlockKind::Zero,
        }
    }

    pub fn identity(size: usize) -> Self {
        Self::circulant(size, 0)
    }

    pub fn circulant(size: usize, offset: usize) -> Self {
        CirculantBlock {
            size,
            kind: BlockKind::Circulant(offset % size.max(1)),
        }
    }

    pub fn zigzag(size: usize) -> Self {
        CirculantBlock {
            size,
            kind: BlockKind::Zigzag,
        }
    }

    /// A permutation block; `perm` must be a permutation of `0..perm.len()`.
    pub fn permutation(perm: Arc<[usize]>) -> Self {
        CirculantBlock {
            size: perm.len(),
            kind: BlockKind::Permutation(perm),
        }
    }

    /// A uniformly random permutation block.
    pub fn random_permutation<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..size).collect();
        perm.shuffle(rng);
        Self::permutation(perm.into())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> &BlockKind {
        &self.kind
    }

    /// Columns holding a 1 in row `r`, ascending.
    pub fn row_cols(&self, r: usize) -> impl Iterator<Item = usize> {
        let n = self.size;
        let (a, b) = match &self.kind {
            BlockKind::Zero => (None, None),
            BlockKind::Circulant(p) => (Some((r + p) % n), None),
            BlockKind::Zigzag if r == 0 => (Some(0), None),
            BlockKind::Zigzag => (Some(r - 1), Some(r)),
            BlockKind::Permutation(perm) => (Some(perm[r]), None),
        };
        a.into_iter().chain(b)
    }

    pub fn nnz(&self) -> usize {
        match self.kind {
            BlockKind::Zero => 0,
            BlockKind::Zigzag => 2 * self.size - self.size.min(1),
            _ => self.size,
        }
    }

    /// Block-times-vector over GF(2). For a circulant with offset p this is
    /// `out[k] = s[(k + p) mod N]`.
    pub fn apply(&self, s: &[u8]) -> Vec<u8> {
        let mut out = vec![0u8; self.size];
        self.apply_xor_into(s, &mut out);
        out
    }

    /// `out ^= block * s`.
    pub fn apply_xor_into(&self, s: &[u8], out: &mut [u8]) {
        let n = self.size;
        match &self.kind {
            BlockKind::Zero => {}
            BlockKind::Circulant(p) => {
                let (head, tail) = s.split_at(*p);
                // out[k] ^= s[k + p] for k < n - p, then wraps around
                for (o, &v) in out[..n - p].iter_mut().zip(tail) {
                    *o ^= v;
                }
                for (o, &v) in out[n - p..].iter_mut().zip(head) {
                    *o ^= v;
                }
            }
            BlockKind::Zigzag => {
                for k in 0..n {
                    out[k] ^= s[k] ^ if k > 0 { s[k - 1] } else { 0 };
                }
            }
            BlockKind::Permutation(perm) => {
                for (o, &j) in out.iter_mut().zip(perm.iter()) {
                    *o ^= s[j];
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut d = vec![vec![0u8; self.size]; self.size];
        for (r, row) in d.iter_mut().enumerate() {
            for c in self.row_cols(r) {
                row[c] = 1;
            }
        }
        d
    }
}

/// What a lifted matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Ldgm,
    LtLdpc,
    EcLdgm,
    /// Channel checks stacked above network checks.
    Unified,
    /// A lifted matrix built from explicit blocks without ensemble semantics.
    Plain,
}

impl From<Ensemble> for MatrixKind {
    fn from(e: Ensemble) -> Self {
        match e {
            Ensemble::Ldgm => MatrixKind::Ldgm,
            Ensemble::LtLdpc => MatrixKind::LtLdpc,
            Ensemble::EcLdgm => MatrixKind::EcLdgm,
        }
    }
}

/// A block-structured sparse parity-check matrix.
#[derive(Debug, Clone)]
pub struct LiftedParityMatrix {
    matrix: SparseBinMatrix,
    kind: MatrixKind,
    block_size: usize,
    base_rows: usize,
    base_cols: usize,
    /// Number of leading block columns that carry source packets.
    systematic_blocks: usize,
    blocks: BTreeMap<(usize, usize), CirculantBlock>,
    /// Leading rows that are channel checks (unified matrices only).
    channel_rows: usize,
}

impl LiftedParityMatrix {
    pub fn matrix(&self) -> &SparseBinMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn base_dims(&self) -> (usize, usize) {
        (self.base_rows, self.base_cols)
    }

    pub fn blocks(&self) -> &BTreeMap<(usize, usize), CirculantBlock> {
        &self.blocks
    }

    pub fn block(&self, r: usize, c: usize) -> Option<&CirculantBlock> {
        self.blocks.get(&(r, c))
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn systematic_blocks(&self) -> usize {
        self.systematic_blocks
    }

    /// Number of leading channel-check rows; zero unless the matrix is unified.
    pub fn channel_rows(&self) -> usize {
        self.channel_rows
    }

    /// The network-check rows of a unified matrix (or the whole matrix otherwise).
    pub fn network_rows(&self) -> std::ops::Range<usize> {
        self.channel_rows..self.matrix.n_rows()
    }

    pub fn syndrome_is_zero(&self, bits: &[u8]) -> Result<bool> {
        self.matrix.syndrome_is_zero(bits)
    }

    pub(crate) fn with_channel_rows(
        &self,
        matrix: SparseBinMatrix,
        channel_rows: usize,
    ) -> LiftedParityMatrix {
        LiftedParityMatrix {
            matrix,
            kind: MatrixKind::Unified,
            channel_rows,
            ..self.clone()
        }
    }
}

/// Assembles a matrix from an explicit block map. Blocks absent from the map are zero.
pub fn lift_blocks(
    base_rows: usize,
    base_cols: usize,
    n: usize,
    blocks: BTreeMap<(usize, usize), CirculantBlock>,
) -> Result<LiftedParityMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("block size must be positive".into()));
    }
    let mut rows = vec![Vec::new(); base_rows * n];
    for (&(br, bc), block) in &blocks {
        if br >= base_rows || bc >= base_cols {
            return Err(Error::Dimension(format!(
                "block ({br}, {bc}) outside a {base_rows}x{base_cols} base"
            )));
        }
        if block.size() != n {
            return Err(Error::Dimension(format!(
                "block ({br}, {bc}) has size {} but N = {n}",
                block.size()
            )));
        }
        for r in 0..n {
            rows[br * n + r].extend(block.row_cols(r).map(|c| bc * n + c));
        }
    }
    let matrix = SparseBinMatrix::from_rows(base_cols * n, rows)?;
    Ok(LiftedParityMatrix {
        matrix,
        kind: MatrixKind::Plain,
        block_size: n,
        base_rows,
        base_cols,
        systematic_blocks: 0,
        blocks,
        channel_rows: 0,
    })
}

fn check_ensemble(base: &BaseMatrix, ensemble: Ensemble) -> Result<()> {
    let ok = match ensemble {
        Ensemble::Ldgm | Ensemble::EcLdgm => base.is_ldgm(),
        Ensemble::LtLdpc => base.is_lower_triangular(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::EnsembleMismatch {
            ensemble: ensemble.name().into(),
            reason: match ensemble {
                Ensemble::LtLdpc => "parity region is not lower triangular".into(),
                _ => "parity region is not diagonal".into(),
            },
        })
    }
}

/// Lifts a base matrix, choosing the block for every off-diagonal nonzero entry
/// with `pick`. The self-parity diagonal becomes the identity (zigzag for EC-LDGM).
pub fn lift_with<F>(
    base: &BaseMatrix,
    n: usize,
    ensemble: Ensemble,
    mut pick: F,
) -> Result<LiftedParityMatrix>
where
    F: FnMut(usize, usize) -> Result<CirculantBlock>,
{
    check_ensemble(base, ensemble)?;
    let mut blocks = BTreeMap::new();
    for r in 0..base.n_rows() {
        for &c in base.row(r) {
            let block = if c == base.self_parity_col(r) {
                match ensemble {
                    Ensemble::EcLdgm => CirculantBlock::zigzag(n),
                    _ => CirculantBlock::identity(n),
                }
            } else {
                pick(r, c)?
            };
            blocks.insert((r, c), block);
        }
    }
    let mut lifted = lift_blocks(base.n_rows(), base.n_cols(), n, blocks)?;
    lifted.kind = ensemble.into();
    lifted.systematic_blocks = base.systematic_cols();
    Ok(lifted)
}

/// Circulant lifting with the given offsets: zero entries become zero blocks,
/// off-diagonal ones `Circulant(p)`, and the diagonal the identity (zigzag for EC-LDGM).
pub fn lift(
    base: &BaseMatrix,
    n: usize,
    ensemble: Ensemble,
    offsets: &OffsetTable,
) -> Result<LiftedParityMatrix> {
    lift_with(base, n, ensemble, |r, c| {
        offsets
            .get(r, c)
            .map(|p| CirculantBlock::circulant(n, p))
            .ok_or(Error::MissingOffset { row: r, col: c })
    })
}

/// Lifting with an independent uniformly random permutation per off-diagonal entry.
pub fn lift_random_permutations<R: Rng + ?Sized>(
    base: &BaseMatrix,
    n: usize,
    ensemble: Ensemble,
    rng: &mut R,
) -> Result<LiftedParityMatrix> {
    lift_with(base, n, ensemble, |_, _| {
        Ok(CirculantBlock::random_permutation(n, rng))
    })
}

/// `y_0 = x_0`, `y_i = x_i ^ x_{i-1}`.
pub fn differential_encode(x: &[u8]) -> Result<Vec<u8>> {
    if x.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut y = Vec::with_capacity(x.len());
    y.push(x[0] & 1);
    y.extend(x.windows(2).map(|w| (w[1] ^ w[0]) & 1));
    Ok(y)
}

/// Running XOR prefix; the inverse of [`differential_encode`].
pub fn differential_decode(y: &[u8]) -> Result<Vec<u8>> {
    if y.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut acc = 0u8;
    Ok(y.iter()
        .map(|&b| {
            acc ^= b & 1;
            acc
        })
        .collect())
}

/// Computes the relay packets of one round from the source packets.
///
/// Relay `r` XORs its selected packets, each passed through the block of its
/// base entry, into `x`; it transmits `x` directly under an identity diagonal.
/// Under a zigzag diagonal it transmits the stream `y` with `y_k ^ y_{k-1} = x_k`,
/// which is the running XOR of `x`. In either case `sources ‖ relays` has zero
/// syndrome.
pub fn encode_network(lifted: &LiftedParityMatrix, sources: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
    let n = lifted.block_size();
    let (m, cols) = lifted.base_dims();
    let k = lifted.systematic_blocks();
    if k + m != cols {
        return Err(Error::Dimension(
            "network encoding needs an m x 2m base layout".into(),
        ));
    }
    if sources.len() != k {
        return Err(Error::Dimension(format!(
            "{} source packets for {k} source columns",
            sources.len()
        )));
    }
    if let Some(bad) = sources.iter().position(|s| s.len() != n) {
        return Err(Error::Dimension(format!(
            "source packet {bad} has {} bits, expected {n}",
            sources[bad].len()
        )));
    }
    let mut relays: Vec<Vec<u8>> = Vec::with_capacity(m);
    for r in 0..m {
        let mut x = vec![0u8; n];
        let mut diagonal = None;
        for ((_, c), block) in lifted.blocks().range((r, 0)..(r + 1, 0)) {
            let c = *c;
            if c == k + r {
                diagonal = Some(block);
                continue;
            }
            let packet = if c < k {
                &sources[c]
            } else if c - k < r {
                &relays[c - k]
            } else {
                return Err(Error::ForwardReference {
                    relay: r,
                    packet: c,
                });
            };
            block.apply_xor_into(packet, &mut x);
        }
        let y = match diagonal.map(CirculantBlock::kind) {
            Some(BlockKind::Zigzag) => differential_decode(&x)?,
            Some(BlockKind::Circulant(0)) => x,
            Some(other) => {
                return Err(Error::InvalidBase(format!(
                    "relay {r} has unsupported self-parity block {other:?}"
                )))
            }
            None => {
                return Err(Error::InvalidBase(format!(
                    "relay {r} has no self-parity block"
                )))
            }
        };
        relays.push(y);
    }
    Ok(relays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circulant_matches_the_four_by_four_example() {
        let b = CirculantBlock::circulant(4, 1);
        assert_eq!(
            b.to_dense(),
            vec![
                vec![0, 1, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 1],
                vec![1, 0, 0, 0],
            ]
        );
        let mut blocks = BTreeMap::new();
        blocks.insert((0, 0), b);
        let lifted = lift_blocks(1, 1, 4, blocks).unwrap();
        assert_eq!(lifted.matrix().to_dense()[3], vec![1, 0, 0, 0]);
    }

    #[test]
    fn zigzag_rows() {
        let z = CirculantBlock::zigzag(3);
        let h = z.to_dense();
        assert_eq!(h, vec![vec![1, 0, 0], vec![1, 1, 0], vec![0, 1, 1]]);
        assert_eq!(z.nnz(), 5);
    }

    #[test]
    fn zero_entry_lifts_to_zero_block() {
        let base = BaseMatrix::from_rows(2, vec![vec![0], vec![1]]).unwrap();
        let lifted = lift(&base, 3, Ensemble::Ldgm, &OffsetTable::product_scheme(&base, 3)).unwrap();
        let d = lifted.matrix().to_dense();
        assert!(d.iter().take(3).all(|row| row[3..6].iter().all(|&x| x == 0)));
        assert!(lifted.block(0, 1).is_none());
    }

    #[test]
    fn ec_ldgm_requires_diagonal_parity() {
        let base = BaseMatrix::from_rows(2, vec![vec![0], vec![1, 2]]).unwrap();
        let offs = OffsetTable::product_scheme(&base, 5);
        assert!(matches!(
            lift(&base, 5, Ensemble::EcLdgm, &offs),
            Err(Error::EnsembleMismatch { .. })
        ));
        assert!(lift(&base, 5, Ensemble::LtLdpc, &offs).is_ok());
    }

    #[test]
    fn differential_examples() {
        assert_eq!(differential_encode(&[0, 0, 0]).unwrap(), vec![0, 0, 0]);
        assert_eq!(differential_encode(&[1, 0, 1, 0]).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(differential_encode(&[1, 1, 1]).unwrap(), vec![1, 0, 0]);
        assert_eq!(differential_encode(&[]), Err(Error::EmptyStream));
    }

    #[test]
    fn differential_round_trip_exhaustive() {
        for len in 1..=16usize {
            for word in 0u32..(1 << len) {
                let x: Vec<u8> = (0..len).map(|i| ((word >> i) & 1) as u8).collect();
                let y = differential_encode(&x).unwrap();
                assert_eq!(differential_decode(&y).unwrap(), x);
                assert_eq!(differential_encode(&differential_decode(&x).unwrap()).unwrap(), x);
            }
        }
    }

    #[test]
    fn two_packet_parity_example() {
        // One relay combining s1 with offset 0 and s2 with offset 1, N = 3.
        let mut blocks = BTreeMap::new();
        blocks.insert((0, 0), CirculantBlock::circulant(3, 0));
        blocks.insert((0, 1), CirculantBlock::circulant(3, 1));
        let mut x = vec![0u8; 3];
        blocks[&(0, 0)].apply_xor_into(&[1, 0, 1], &mut x);
        blocks[&(0, 1)].apply_xor_into(&[0, 1, 1], &mut x);
        assert_eq!(x, vec![0, 1, 1]);
    }

    #[test]
    fn encoded_rounds_have_zero_syndrome() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 4;
        let n = 7;
        let lt = BaseMatrix::from_rows(
            m,
            vec![vec![0, 1], vec![1, 2, 4], vec![0, 3, 4, 5], vec![2, 3, 6]],
        )
        .unwrap();
        let ldgm = BaseMatrix::from_rows(m, vec![vec![0, 1], vec![1, 2], vec![0, 3], vec![2, 3]])
            .unwrap();
        for (base, ens) in [
            (&lt, Ensemble::LtLdpc),
            (&ldgm, Ensemble::Ldgm),
            (&ldgm, Ensemble::EcLdgm),
        ] {
            let offs = OffsetTable::product_scheme(base, n);
            let lifted = lift(base, n, ens, &offs).unwrap();
            let sources: Vec<Vec<u8>> = (0..m)
                .map(|_| (0..n).map(|_| rng.random_range(0..2u8)).collect())
                .collect();
            let relays = encode_network(&lifted, &sources).unwrap();
            let word: Vec<u8> = sources.iter().chain(relays.iter()).flatten().copied().collect();
            assert!(lifted.syndrome_is_zero(&word).unwrap(), "{ens}");
            let zeros = vec![vec![0u8; n]; m];
            assert!(encode_network(&lifted, &zeros)
                .unwrap()
                .iter()
                .all(|p| p.iter().all(|&b| b == 0)));
        }
    }

    #[test]
    fn identity_lifting_with_unit_blocks_is_the_base() {
        let base = BaseMatrix::from_rows(3, vec![vec![0, 2], vec![0, 1, 3], vec![1, 2, 4]]).unwrap();
        let lifted = lift(&base, 1, Ensemble::LtLdpc, &OffsetTable::identity(&base)).unwrap();
        assert_eq!(lifted.matrix().to_dense(), base.to_dense());
    }

    #[test]
    fn random_permutation_lifting_encodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = BaseMatrix::from_rows(3, vec![vec![0, 2], vec![0, 1, 3], vec![1, 2]]).unwrap();
        let lifted = lift_random_permutations(&base, 16, Ensemble::LtLdpc, &mut rng).unwrap();
        let sources: Vec<Vec<u8>> = (0..3)
            .map(|_| (0..16).map(|_| rng.random_range(0..2u8)).collect())
            .collect();
        let relays = encode_network(&lifted, &sources).unwrap();
        let word: Vec<u8> = sources.iter().chain(relays.iter()).flatten().copied().collect();
        assert!(lifted.syndrome_is_zero(&word).unwrap());
    }
}
