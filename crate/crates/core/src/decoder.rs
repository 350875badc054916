//! Sum-product decoding with a flooding schedule, and the three ways of
//! decoding a network code whose source packets carry their own channel codes.

use std::fmt;

use crate::codes::{ChannelCodeSpec, LiftedParityMatrix};
use crate::error::{Error, Result};
use crate::sparse::SparseBinMatrix;

/// Messages are clamped to this magnitude.
pub const LLR_CLAMP: f64 = 30.0;
const TANH_CLAMP: f64 = 1.0 - 1e-12;

/// Edge lists of a Tanner graph, check-major.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    n_vars: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
}

impl TannerGraph {
    pub fn new(h: &SparseBinMatrix) -> Self {
        let mut check_ptr = Vec::with_capacity(h.n_rows() + 1);
        let mut edge_var = Vec::with_capacity(h.nnz());
        check_ptr.push(0);
        for row in h.rows() {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len());
        }
        let mut var_ptr = vec![0usize; h.n_cols() + 1];
        for &v in &edge_var {
            var_ptr[v + 1] += 1;
        }
        for v in 0..h.n_cols() {
            var_ptr[v + 1] += var_ptr[v];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        TannerGraph {
            n_vars: h.n_cols(),
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.check_ptr.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    fn syndrome_is_zero(&self, hard: &[u8]) -> bool {
        self.check_ptr.windows(2).all(|w| {
            self.edge_var[w[0]..w[1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ hard[v])
                == 0
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub hard: Vec<u8>,
    pub posterior: Vec<f64>,
    pub iterations: usize,
    /// The hard decisions have zero syndrome.
    pub converged: bool,
}

/// Reusable sum-product decoder for one graph.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    graph: TannerGraph,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    prefix: Vec<f64>,
    /// Stop as soon as the hard decisions satisfy every check.
    pub early_stop: bool,
}

impl BpDecoder {
    pub fn new(h: &SparseBinMatrix) -> Self {
        Self::from_graph(TannerGraph::new(h))
    }

    pub fn from_graph(graph: TannerGraph) -> Self {
        let e = graph.n_edges();
        BpDecoder {
            graph,
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            prefix: Vec::new(),
            early_stop: true,
        }
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn decode(&mut self, llr: &[f64], max_iters: usize) -> Result<DecodeResult> {
        let g = &self.graph;
        if llr.len() != g.n_vars {
            return Err(Error::Dimension(format!(
                "{} LLRs for {} variables",
                llr.len(),
                g.n_vars
            )));
        }
        if max_iters == 0 {
            return Err(Error::InvalidParameter("at least one BP iteration is needed".into()));
        }
        let mut hard: Vec<u8> = llr.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut posterior = llr.to_vec();
        if self.early_stop && g.syndrome_is_zero(&hard) {
            return Ok(DecodeResult {
                hard,
                posterior,
                iterations: 0,
                converged: true,
            });
        }
        for (e, &v) in g.edge_var.iter().enumerate() {
            self.v2c[e] = llr[v].clamp(-LLR_CLAMP, LLR_CLAMP);
        }
        let mut iterations = 0;
        let mut converged = false;
        for _ in 0..max_iters {
            iterations += 1;
            // Check update: leave-one-out tanh products via prefix/suffix scans.
            for w in g.check_ptr.windows(2) {
                let (a, b) = (w[0], w[1]);
                let t = &mut self.v2c[a..b];
                for x in t.iter_mut() {
                    *x = (*x * 0.5).tanh();
                }
                self.prefix.clear();
                let mut acc = 1.0;
                for &x in t.iter() {
                    self.prefix.push(acc);
                    acc *= x;
                }
                let mut suffix = 1.0;
                for k in (0..t.len()).rev() {
                    let prod = (self.prefix[k] * suffix).clamp(-TANH_CLAMP, TANH_CLAMP);
                    self.c2v[a + k] = (2.0 * prod.atanh()).clamp(-LLR_CLAMP, LLR_CLAMP);
                    suffix *= t[k];
                }
            }
            // Variable update.
            for v in 0..g.n_vars {
                let edges = &g.var_edges[g.var_ptr[v]..g.var_ptr[v + 1]];
                let total = llr[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
                posterior[v] = total;
                hard[v] = u8::from(total < 0.0);
                for &e in edges {
                    self.v2c[e] = (total - self.c2v[e]).clamp(-LLR_CLAMP, LLR_CLAMP);
                }
            }
            converged = g.syndrome_is_zero(&hard);
            if converged && self.early_stop {
                break;
            }
        }
        Ok(DecodeResult {
            hard,
            posterior,
            iterations,
            converged,
        })
    }
}

/// One-shot flooding BP with early exit on a zero syndrome.
pub fn sum_product(h: &SparseBinMatrix, llr: &[f64], max_iters: usize) -> Result<DecodeResult> {
    BpDecoder::new(h).decode(llr, max_iters)
}

/// Whether `bits` is a codeword of `h`.
pub fn syndrome(h: &SparseBinMatrix, bits: &[u8]) -> Result<bool> {
    h.syndrome_is_zero(bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStrategy {
    /// One BP over the unified network-channel matrix.
    Joint,
    /// Network BP, then channel BP seeded with the network posteriors.
    Sequential,
    /// `g` extra rounds of extrinsic exchange after the first network/channel pass.
    IterativeGlobal(usize),
}

impl fmt::Display for DecodeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeStrategy::Joint => f.write_str("joint"),
            DecodeStrategy::Sequential => f.write_str("sequential"),
            DecodeStrategy::IterativeGlobal(g) => write!(f, "iterative:{g}"),
        }
    }
}

impl std::str::FromStr for DecodeStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "joint" => Ok(DecodeStrategy::Joint),
            "sequential" => Ok(DecodeStrategy::Sequential),
            _ => s
                .strip_prefix("iterative:")
                .and_then(|g| g.parse().ok())
                .map(DecodeStrategy::IterativeGlobal)
                .ok_or_else(|| Error::Config(format!("unknown decoder '{s}'"))),
        }
    }
}

/// Iteration budget of each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterBudget {
    pub network: usize,
    pub channel: usize,
    pub joint: usize,
}

impl IterBudget {
    pub fn uniform(iters: usize) -> Self {
        IterBudget {
            network: iters,
            channel: iters,
            joint: iters,
        }
    }
}

/// Prepared decoders for one round's network code and channel codes.
pub struct StagedDecoder<'a> {
    network: &'a LiftedParityMatrix,
    specs: &'a [ChannelCodeSpec],
    net: BpDecoder,
    channels: Vec<Option<BpDecoder>>,
}

impl<'a> StagedDecoder<'a> {
    pub fn new(network: &'a LiftedParityMatrix, specs: &'a [ChannelCodeSpec]) -> Result<Self> {
        let users = network.systematic_blocks();
        if specs.len() != users {
            return Err(Error::Dimension(format!(
                "{} channel codes for {users} users",
                specs.len()
            )));
        }
        if specs.iter().any(|s| s.n() != network.block_size()) {
            return Err(Error::Dimension("channel code length differs from the packet length".into()));
        }
        Ok(StagedDecoder {
            network,
            specs,
            net: BpDecoder::new(network.matrix()),
            channels: specs
                .iter()
                .map(|s| s.parity_check().map(BpDecoder::new))
                .collect(),
        })
    }

    /// Network stage with an a-priori term on the source columns. Returns the
    /// result and the extrinsic output `posterior - llr - prior` on those columns.
    pub fn network_pass(
        &mut self,
        llr: &[f64],
        prior: &[f64],
        iters: usize,
    ) -> Result<(DecodeResult, Vec<f64>)> {
        let mut input = llr.to_vec();
        for (x, p) in input.iter_mut().zip(prior) {
            *x += p;
        }
        let res = self.net.decode(&input, iters)?;
        let ext = (0..prior.len()).map(|k| res.posterior[k] - input[k]).collect();
        Ok((res, ext))
    }

    /// Channel stage on every source packet. Uncoded users pass their input through.
    /// Returns posteriors, extrinsic outputs, iterations used and convergence.
    pub fn channel_pass(&mut self, input: &[f64], iters: usize) -> Result<(Vec<f64>, Vec<f64>, usize, bool)> {
        let n = self.network.block_size();
        let mut post = input.to_vec();
        let mut used = 0;
        let mut ok = true;
        for (u, dec) in self.channels.iter_mut().enumerate() {
            if let Some(dec) = dec {
                let r = dec.decode(&input[u * n..(u + 1) * n], iters)?;
                post[u * n..(u + 1) * n].copy_from_slice(&r.posterior);
                used = used.max(r.iterations);
                ok &= r.converged;
            }
        }
        let ext = post.iter().zip(input).map(|(p, i)| p - i).collect();
        Ok((post, ext, used, ok))
    }

    /// Sequential decoding when `global == 0`, otherwise up to `global` extra
    /// rounds of extrinsic exchange. Rounds stop once the channel codes have
    /// converged and the combined decision satisfies the network checks.
    pub fn decode(&mut self, llr: &[f64], budget: IterBudget, global: usize) -> Result<DecodeResult> {
        let sys = self.network.systematic_blocks() * self.network.block_size();
        if llr.len() != self.network.n_cols() {
            return Err(Error::Dimension(format!(
                "{} LLRs for {} columns",
                llr.len(),
                self.network.n_cols()
            )));
        }
        let mut prior = vec![0.0; sys];
        let mut iterations = 0;
        let mut last = None;
        for _ in 0..=global {
            let (net, net_ext) = self.network_pass(llr, &prior, budget.network)?;
            iterations += net.iterations;
            let ch_in: Vec<f64> = (0..sys).map(|k| llr[k] + net_ext[k]).collect();
            let (post, ch_ext, used, ch_ok) = self.channel_pass(&ch_in, budget.channel)?;
            iterations += used;
            prior = ch_ext;
            let done = ch_ok && self.net.early_stop && {
                let mut hard: Vec<u8> = net.posterior.iter().map(|&l| u8::from(l < 0.0)).collect();
                for (h, &l) in hard.iter_mut().zip(&post) {
                    *h = u8::from(l < 0.0);
                }
                self.network.syndrome_is_zero(&hard)?
            };
            last = Some((net, post, ch_ok));
            if done {
                break;
            }
        }
        let (net, post, ch_ok) = last.expect("at least one round");
        let mut posterior = net.posterior;
        posterior[..sys].copy_from_slice(&post);
        let hard: Vec<u8> = posterior.iter().map(|&l| u8::from(l < 0.0)).collect();
        let converged = ch_ok && self.network.syndrome_is_zero(&hard)? && self.channel_codewords(&hard);
        Ok(DecodeResult {
            hard,
            posterior,
            iterations,
            converged,
        })
    }

    fn channel_codewords(&self, hard: &[u8]) -> bool {
        let n = self.network.block_size();
        self.specs.iter().enumerate().all(|(u, s)| {
            s.parity_check()
                .is_none_or(|h| h.syndrome_is_zero(&hard[u * n..(u + 1) * n]).unwrap_or(false))
        })
    }
}

/// Network BP for `budget.network` iterations, then per-user channel BP on the
/// full network posteriors.
pub fn decode_sequential(
    network: &LiftedParityMatrix,
    specs: &[ChannelCodeSpec],
    llr: &[f64],
    budget: IterBudget,
) -> Result<DecodeResult> {
    StagedDecoder::new(network, specs)?.decode(llr, budget, 0)
}

/// `global + 1` network/channel passes exchanging extrinsic information.
pub fn decode_iterative_global(
    network: &LiftedParityMatrix,
    specs: &[ChannelCodeSpec],
    llr: &[f64],
    budget: IterBudget,
    global: usize,
) -> Result<DecodeResult> {
    StagedDecoder::new(network, specs)?.decode(llr, budget, global)
}

/// A single BP over the unified matrix.
pub fn decode_joint(unified: &LiftedParityMatrix, llr: &[f64], iters: usize) -> Result<DecodeResult> {
    sum_product(unified.matrix(), llr, iters)
}

/// Dispatches on `strategy`. `unified` is required for joint decoding.
pub fn decode_with(
    strategy: DecodeStrategy,
    network: &LiftedParityMatrix,
    unified: &LiftedParityMatrix,
    specs: &[ChannelCodeSpec],
    llr: &[f64],
    budget: IterBudget,
) -> Result<DecodeResult> {
    match strategy {
        DecodeStrategy::Joint => decode_joint(unified, llr, budget.joint),
        DecodeStrategy::Sequential => decode_sequential(network, specs, llr, budget),
        DecodeStrategy::IterativeGlobal(g) => decode_iterative_global(network, specs, llr, budget, g),
    }
}

/// Exact bitwise MAP posteriors by enumerating all `2^n` words. Small codes only.
pub fn bitwise_map(h: &SparseBinMatrix, llr: &[f64]) -> Result<Vec<f64>> {
    let n = h.n_cols();
    if n > 20 {
        return Err(Error::InvalidParameter("exhaustive MAP is limited to 20 columns".into()));
    }
    let row_masks: Vec<u32> = h
        .rows()
        .iter()
        .map(|r| r.iter().fold(0u32, |m, &c| m | 1 << c))
        .collect();
    // log p(word) up to a constant: sum over ones of -llr.
    let mut logp = Vec::new();
    let mut words = Vec::new();
    for w in 0u32..(1 << n) {
        if row_masks.iter().all(|&m| (w & m).count_ones() % 2 == 0) {
            words.push(w);
            logp.push(-(0..n).filter(|&k| w >> k & 1 == 1).map(|k| llr[k]).sum::<f64>());
        }
    }
    let top = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((0..n)
        .map(|k| {
            let (mut p0, mut p1) = (0.0, 0.0);
            for (w, lp) in words.iter().zip(&logp) {
                let p = (lp - top).exp();
                if w >> k & 1 == 0 {
                    p0 += p;
                } else {
                    p1 += p;
                }
            }
            (p0 / p1).ln()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{embed_channel_codes, encode_network, lift, BaseMatrix, Ensemble, OffsetTable};
    use crate::gf2::generate_regular_ldpc;

    fn m(rows: Vec<Vec<usize>>, n: usize) -> SparseBinMatrix {
        SparseBinMatrix::from_rows(n, rows).unwrap()
    }

    #[test]
    fn single_parity_check_confident_input() {
        let r = sum_product(&m(vec![vec![0, 1, 2]], 3), &[5.0; 3], 10).unwrap();
        assert_eq!(r.hard, vec![0, 0, 0]);
        assert!(r.converged);
        assert!(r.iterations <= 1);
    }

    #[test]
    fn repetition_code_corrects_one_flip() {
        let h = m(vec![vec![0, 1], vec![1, 2]], 3);
        let r = sum_product(&h, &[-1.0, 3.0, 3.0], 10).unwrap();
        assert_eq!(r.hard, vec![0, 0, 0]);
        let map = bitwise_map(&h, &[-1.0, 3.0, 3.0]).unwrap();
        assert!(map.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn codeword_is_a_fixed_point() {
        let h = m(vec![vec![0, 1, 2], vec![2, 3]], 4);
        let llr = [-100.0, 100.0, -100.0, -100.0];
        let r = sum_product(&h, &llr, 5).unwrap();
        assert_eq!(r.hard, vec![1, 0, 1, 1]);
        assert!(r.converged);
    }

    #[test]
    fn bp_is_map_on_a_tree() {
        let h = m(vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![1, 6]], 7);
        let llr = [0.3, -1.2, 0.8, -0.1, 2.0, -0.7, 0.4];
        let mut dec = BpDecoder::new(&h);
        dec.early_stop = false;
        let bp = dec.decode(&llr, 20).unwrap();
        let map = bitwise_map(&h, &llr).unwrap();
        for (a, b) in bp.posterior.iter().zip(&map) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn outputs_stay_finite() {
        let h = m(vec![vec![0, 1], vec![0, 1], vec![0, 1, 2]], 3);
        let r = sum_product(&h, &[1e300, -1e300, 0.0], 50).unwrap();
        assert!(r.posterior.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn syndrome_checks() {
        let h = m(vec![vec![0, 3, 4, 5], vec![1, 2, 4, 5, 6]], 7);
        assert!(syndrome(&h, &[0; 7]).unwrap());
        assert!(!syndrome(&h, &[1, 0, 0, 0, 0, 0, 0]).unwrap());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("joint".parse::<DecodeStrategy>().unwrap(), DecodeStrategy::Joint);
        assert_eq!("iterative:5".parse::<DecodeStrategy>().unwrap(), DecodeStrategy::IterativeGlobal(5));
        assert!("iterative:x".parse::<DecodeStrategy>().is_err());
    }

    fn coded_setup() -> (LiftedParityMatrix, LiftedParityMatrix, Vec<ChannelCodeSpec>, Vec<u8>) {
        let n = 24;
        let base = BaseMatrix::from_rows(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let net = lift(&base, n, Ensemble::Ldgm, &OffsetTable::product_scheme(&base, n)).unwrap();
        let specs: Vec<ChannelCodeSpec> = (0..3)
            .map(|u| ChannelCodeSpec::from_parity_check(generate_regular_ldpc(n, 3, 6, u).unwrap()))
            .collect();
        let unified = embed_channel_codes(&net, &specs).unwrap();
        let sources: Vec<Vec<u8>> = specs
            .iter()
            .enumerate()
            .map(|(u, s)| s.encode(&(0..s.k()).map(|k| ((k * 7 + u) % 3 == 0) as u8).collect::<Vec<_>>()).unwrap())
            .collect();
        let relays = encode_network(&net, &sources).unwrap();
        let word: Vec<u8> = sources.into_iter().chain(relays).flatten().collect();
        (net, unified, specs, word)
    }

    #[test]
    fn noiseless_decoding_for_every_strategy() {
        let (net, unified, specs, word) = coded_setup();
        assert!(unified.syndrome_is_zero(&word).unwrap());
        let llr: Vec<f64> = word.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect();
        for s in [DecodeStrategy::Joint, DecodeStrategy::Sequential, DecodeStrategy::IterativeGlobal(3)] {
            let r = decode_with(s, &net, &unified, &specs, &llr, IterBudget::uniform(10)).unwrap();
            assert_eq!(r.hard, word, "{s}");
            assert!(r.converged, "{s}");
        }
    }

    #[test]
    fn zero_global_rounds_is_sequential() {
        let (net, _, specs, word) = coded_setup();
        let llr: Vec<f64> = word
            .iter()
            .enumerate()
            .map(|(k, &b)| (if b == 0 { 1.0 } else { -1.0 }) * (0.2 + (k % 5) as f64 * 0.3) - 0.1)
            .collect();
        let b = IterBudget::uniform(7);
        assert_eq!(
            decode_sequential(&net, &specs, &llr, b).unwrap(),
            decode_iterative_global(&net, &specs, &llr, b, 0).unwrap()
        );
    }

    #[test]
    fn uncoded_users_reduce_to_network_bp() {
        let (net, _, _, _) = coded_setup();
        let specs: Vec<ChannelCodeSpec> = (0..3).map(|_| ChannelCodeSpec::uncoded(24)).collect();
        let unified = embed_channel_codes(&net, &specs).unwrap();
        let llr: Vec<f64> = (0..net.n_cols()).map(|k| ((k * 37 % 11) as f64 - 3.0) * 0.4).collect();
        let plain = sum_product(net.matrix(), &llr, 9).unwrap();
        assert_eq!(decode_sequential(&net, &specs, &llr, IterBudget::uniform(9)).unwrap().hard, plain.hard);
        assert_eq!(decode_joint(&unified, &llr, 9).unwrap(), plain);
    }

    #[test]
    fn network_extrinsic_excludes_own_prior() {
        let (net, _, specs, _) = coded_setup();
        let mut stage = StagedDecoder::new(&net, &specs).unwrap();
        stage.net.early_stop = false;
        let llr: Vec<f64> = (0..net.n_cols()).map(|k| ((k * 13 % 7) as f64 - 2.5) * 0.5).collect();
        let sys = 3 * 24;
        let prior = vec![0.3; sys];
        let (_, base_ext) = stage.network_pass(&llr, &prior, 1).unwrap();
        for probe in [0, 17, 50] {
            let mut bumped = prior.clone();
            bumped[probe] += 2.0;
            let (_, ext) = stage.network_pass(&llr, &bumped, 1).unwrap();
            assert!((ext[probe] - base_ext[probe]).abs() < 1e-12);
        }
    }
}
