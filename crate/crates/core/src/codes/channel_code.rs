use super::lift::LiftedParityMatrix;
use crate::error::{Error, Result};
use crate::gf2::{gf2_systematize, SystematicEncoder};
use crate::sparse::SparseBinMatrix;

/// The channel code protecting one user's source packet.
///
/// An uncoded user has no parity checks at all and every one of its `n` bits
/// is an information bit.
#[derive(Debug, Clone)]
pub struct ChannelCodeSpec {
    n: usize,
    code: Option<(SparseBinMatrix, SystematicEncoder)>,
}

impl ChannelCodeSpec {
    pub fn uncoded(n: usize) -> Self {
        ChannelCodeSpec { n, code: None }
    }

    /// Wraps a parity-check matrix and derives its encoder.
    pub fn from_parity_check(h: SparseBinMatrix) -> Self {
        let enc = gf2_systematize(&h);
        ChannelCodeSpec {
            n: h.n_cols(),
            code: Some((h, enc)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_coded(&self) -> bool {
        self.code.is_some()
    }

    /// Information bits per packet.
    pub fn k(&self) -> usize {
        self.code.as_ref().map_or(self.n, |(_, e)| e.k())
    }

    pub fn parity_check(&self) -> Option<&SparseBinMatrix> {
        self.code.as_ref().map(|(h, _)| h)
    }

    pub fn encoder(&self) -> Option<&SystematicEncoder> {
        self.code.as_ref().map(|(_, e)| e)
    }

    /// Number of channel-check rows this user contributes.
    pub fn check_rows(&self) -> usize {
        self.parity_check().map_or(0, SparseBinMatrix::n_rows)
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        match &self.code {
            None if info.len() == self.n => Ok(info.to_vec()),
            None => Err(Error::Dimension(format!(
                "{} bits for an uncoded packet of {}",
                info.len(),
                self.n
            ))),
            Some((_, e)) => e.encode(info),
        }
    }

    pub fn extract_info(&self, word: &[u8]) -> Vec<u8> {
        match &self.code {
            None => word.to_vec(),
            Some((_, e)) => e.extract_info(word),
        }
    }

    /// Codeword positions that carry information bits.
    pub fn info_positions(&self) -> Vec<usize> {
        match &self.code {
            None => (0..self.n).collect(),
            Some((_, e)) => e.info_positions().to_vec(),
        }
    }
}

/// Stacks the users' channel checks, block diagonal over the source-packet
/// columns, above the network checks.
pub fn embed_channel_codes(
    network: &LiftedParityMatrix,
    specs: &[ChannelCodeSpec],
) -> Result<LiftedParityMatrix> {
    let n = network.block_size();
    let users = network.systematic_blocks();
    if specs.len() != users {
        return Err(Error::Dimension(format!(
            "{} channel codes for {users} users",
            specs.len()
        )));
    }
    if let Some(bad) = specs.iter().position(|s| s.n() != n) {
        return Err(Error::Dimension(format!(
            "user {bad} has a length-{} channel code but packets are {n} bits",
            specs[bad].n()
        )));
    }
    let mut rows = Vec::new();
    for (u, spec) in specs.iter().enumerate() {
        if let Some(h) = spec.parity_check() {
            rows.extend(
                h.rows()
                    .iter()
                    .map(|r| r.iter().map(|&c| u * n + c).collect::<Vec<_>>()),
            );
        }
    }
    let channel_rows = rows.len();
    rows.extend(network.matrix().rows().iter().cloned());
    let matrix = SparseBinMatrix::from_rows(network.n_cols(), rows)?;
    Ok(network.with_channel_rows(matrix, channel_rows))
}
