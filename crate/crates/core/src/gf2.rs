//! Dense GF(2) elimination for systematic encoding, and a PEG-style generator
//! for regular LDPC parity-check matrices.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::SparseBinMatrix;

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn get_bit(v: &[u64], i: usize) -> bool {
    (v[i / 64] >> (i % 64)) & 1 == 1
}

fn set_bit(v: &mut [u64], i: usize) {
    v[i / 64] |= 1 << (i % 64);
}

/// Encoder obtained by reducing H to row echelon form.
///
/// Each pivot column is a parity bit equal to the XOR of the information bits
/// flagged in its reduced row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystematicEncoder {
    n: usize,
    rank: usize,
    info_positions: Vec<usize>,
    pivots: Vec<usize>,
    /// Per pivot, bit-packed coefficients over the information index.
    coeffs: Vec<Vec<u64>>,
}

impl SystematicEncoder {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of information bits, `n - rank`.
    pub fn k(&self) -> usize {
        self.n - self.rank
    }

    /// Codeword positions carrying the information bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn parity_positions(&self) -> &[usize] {
        &self.pivots
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::Dimension(format!(
                "{} information bits for k = {}",
                info.len(),
                self.k()
            )));
        }
        let mut packed = vec![0u64; words(self.k())];
        let mut word = vec![0u8; self.n];
        for (i, (&b, &pos)) in info.iter().zip(&self.info_positions).enumerate() {
            if b & 1 == 1 {
                set_bit(&mut packed, i);
                word[pos] = 1;
            }
        }
        for (coef, &pivot) in self.coeffs.iter().zip(&self.pivots) {
            let parity = coef
                .iter()
                .zip(&packed)
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>();
            word[pivot] = (parity & 1) as u8;
        }
        Ok(word)
    }

    /// Reads the information bits back out of a codeword.
    pub fn extract_info(&self, word: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| word[p]).collect()
    }
}

/// Reduced row echelon form of `h` over GF(2), pivoting left to right.
///
/// A rank-deficient `h` is not an error here: the encoder simply carries
/// `n - rank` information bits. Use [`SystematicEncoder::rank`] to decide.
pub fn gf2_systematize(h: &SparseBinMatrix) -> SystematicEncoder {
    let n = h.n_cols();
    let w = words(n);
    let mut rows: Vec<Vec<u64>> = h
        .rows()
        .iter()
        .map(|r| {
            let mut v = vec![0u64; w];
            for &c in r {
                set_bit(&mut v, c);
            }
            v
        })
        .collect();

    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        if rank == rows.len() {
            break;
        }
        let Some(p) = (rank..rows.len()).find(|&r| get_bit(&rows[r], col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && get_bit(row, col) {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }

    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let coeffs = rows[..rank]
        .iter()
        .map(|row| {
            let mut packed = vec![0u64; words(info_positions.len())];
            for (i, &pos) in info_positions.iter().enumerate() {
                if get_bit(row, pos) {
                    set_bit(&mut packed, i);
                }
            }
            packed
        })
        .collect();
    SystematicEncoder {
        n,
        rank,
        info_positions,
        pivots,
        coeffs,
    }
}

/// Generates an `(n, wc, wr)`-regular parity-check matrix with progressive edge
/// growth: each new edge goes to the check farthest from the variable in the
/// current graph, least-loaded first, ties at random.
pub fn generate_regular_ldpc(n: usize, wc: usize, wr: usize, seed: u64) -> Result<SparseBinMatrix> {
    if n == 0 || wc == 0 || wr == 0 {
        return Err(Error::InvalidParameter("n, wc and wr must be positive".into()));
    }
    if !(n * wc).is_multiple_of(wr) {
        return Err(Error::InvalidParameter(format!(
            "n*wc = {} is not divisible by wr = {wr}",
            n * wc
        )));
    }
    let m = n * wc / wr;
    if wc > m {
        return Err(Error::InvalidParameter(format!(
            "column weight {wc} exceeds the {m} available checks"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(wc); n];
    let mut chk_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(wr); m];

    let mut chk_dist = vec![usize::MAX; m];
    let mut var_seen = vec![false; n];
    let mut queue = VecDeque::new();

    for v in 0..n {
        for _ in 0..wc {
            // Distance (in check hops) of every check from v.
            chk_dist.iter_mut().for_each(|d| *d = usize::MAX);
            var_seen.iter_mut().for_each(|s| *s = false);
            queue.clear();
            var_seen[v] = true;
            queue.push_back((v, 0usize));
            while let Some((u, d)) = queue.pop_front() {
                for &c in &var_adj[u] {
                    if chk_dist[c] == usize::MAX {
                        chk_dist[c] = d;
                        for &u2 in &chk_adj[c] {
                            if !var_seen[u2] {
                                var_seen[u2] = true;
                                queue.push_back((u2, d + 1));
                            }
                        }
                    }
                }
            }
            let candidates: Vec<usize> = (0..m)
                .filter(|&c| chk_adj[c].len() < wr && !var_adj[v].contains(&c))
                .collect();
            if candidates.is_empty() {
                repair_edge(v, wr, &mut var_adj, &mut chk_adj, &mut rng)?;
                continue;
            }
            let far = candidates.iter().map(|&c| chk_dist[c]).max().unwrap();
            let far: Vec<usize> = candidates
                .into_iter()
                .filter(|&c| chk_dist[c] == far)
                .collect();
            let load = far.iter().map(|&c| chk_adj[c].len()).min().unwrap();
            let best: Vec<usize> = far
                .into_iter()
                .filter(|&c| chk_adj[c].len() == load)
                .collect();
            let c = best[rng.random_range(0..best.len())];
            var_adj[v].push(c);
            chk_adj[c].push(v);
        }
    }
    SparseBinMatrix::from_rows(n, chk_adj)
}

/// Every check with spare capacity is already adjacent to `v`: move an existing
/// edge `(u, c2)` to `(u, c)` and give `v` the freed slot on `c2`.
fn repair_edge<R: Rng>(
    v: usize,
    wr: usize,
    var_adj: &mut [Vec<usize>],
    chk_adj: &mut [Vec<usize>],
    rng: &mut R,
) -> Result<()> {
    let open: Vec<usize> = (0..chk_adj.len())
        .filter(|&c| chk_adj[c].len() < wr)
        .collect();
    let c = open[rng.random_range(0..open.len())];
    let mut options = Vec::new();
    for (c2, vars) in chk_adj.iter().enumerate() {
        if c2 == c || var_adj[v].contains(&c2) {
            continue;
        }
        for &u in vars {
            if u != v && !var_adj[u].contains(&c) {
                options.push((u, c2));
            }
        }
    }
    if options.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot complete a regular graph with these weights".into(),
        ));
    }
    let (u, c2) = options[rng.random_range(0..options.len())];
    var_adj[u].retain(|&x| x != c2);
    chk_adj[c2].retain(|&x| x != u);
    var_adj[u].push(c);
    chk_adj[c].push(u);
    var_adj[v].push(c2);
    chk_adj[c2].push(v);
    Ok(())
}
