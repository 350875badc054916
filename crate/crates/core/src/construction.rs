//! One round of the cooperation protocol and the distributed construction of
//! its base matrix.
//!
//! Users, source packets and relay packets are 0-indexed here: user `u` sends
//! source packet `u` and relay packet `m + u`. Users relay in index order.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::codes::{BaseMatrix, Ensemble};
use crate::error::{Error, Result};

/// Directed inter-user connectivity of one round. `link(u, v)` means `v`
/// decodes what `u` transmits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    m: usize,
    links: Vec<bool>,
}

impl Topology {
    pub fn empty(m: usize) -> Self {
        Topology {
            m,
            links: vec![false; m * m],
        }
    }

    pub fn full(m: usize) -> Self {
        let mut t = Self::empty(m);
        for u in 0..m {
            for v in 0..m {
                if u != v {
                    t.links[u * m + v] = true;
                }
            }
        }
        t
    }

    pub fn from_links(m: usize, links: &[(usize, usize)]) -> Result<Self> {
        let mut t = Self::empty(m);
        for &(u, v) in links {
            if u >= m || v >= m {
                return Err(Error::InvalidParameter(format!(
                    "link {u}->{v} outside {m} users"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self link at user {u}")));
            }
            t.links[u * m + v] = true;
        }
        Ok(t)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn link(&self, u: usize, v: usize) -> bool {
        self.links[u * self.m + v]
    }

    /// Whether `v` hears `u`'s transmissions, counting a user as hearing itself.
    pub fn hears(&self, v: usize, u: usize) -> bool {
        u == v || self.link(u, v)
    }

    pub fn links(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|u| (0..self.m).map(move |v| (u, v)))
            .filter(|&(u, v)| self.link(u, v))
            .collect()
    }
}

/// Statistical model for inter-user links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkModel {
    /// Link up iff `|a|^2 * inter_snr > gamma_th` with `|a|^2 ~ Exp(1)`.
    Rayleigh { inter_snr: f64, gamma_th: f64 },
    /// Each link fails independently with probability `eps`.
    Erasure { eps: f64 },
}

impl LinkModel {
    pub fn link_probability(&self) -> f64 {
        match *self {
            LinkModel::Rayleigh { inter_snr, gamma_th } => {
                if gamma_th <= 0.0 {
                    1.0
                } else if inter_snr <= 0.0 {
                    0.0
                } else {
                    (-gamma_th / inter_snr).exp()
                }
            }
            LinkModel::Erasure { eps } => 1.0 - eps,
        }
    }
}

pub fn sample_topology<R: Rng + ?Sized>(m: usize, model: LinkModel, rng: &mut R) -> Result<Topology> {
    if m < 2 {
        return Err(Error::InvalidParameter("cooperation needs at least 2 users".into()));
    }
    let mut t = Topology::empty(m);
    for u in 0..m {
        for v in 0..m {
            if u == v {
                continue;
            }
            t.links[u * m + v] = match model {
                LinkModel::Rayleigh { inter_snr, gamma_th } => {
                    let g: f64 = Exp1.sample(rng);
                    g * inter_snr > gamma_th || gamma_th <= 0.0
                }
                LinkModel::Erasure { eps } => rng.random::<f64>() >= eps,
            };
        }
    }
    Ok(t)
}

/// Whether relays overhear earlier relay packets (time division) or only
/// source packets (simultaneous relaying).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayMode {
    Ldgm,
    Lt,
}

impl From<Ensemble> for RelayMode {
    fn from(e: Ensemble) -> Self {
        if e.uses_relay_packets() {
            RelayMode::Lt
        } else {
            RelayMode::Ldgm
        }
    }
}

/// The packets a user decoded and may combine. Sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalSet {
    pub owner: usize,
    pub packets: Vec<usize>,
}

impl RetrievalSet {
    pub fn sources(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        self.packets.iter().copied().filter(move |&p| p < m)
    }

    pub fn relays(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        self.packets.iter().copied().filter(move |&p| p >= m)
    }
}

pub fn build_retrieval_sets(topology: &Topology, mode: RelayMode) -> Vec<RetrievalSet> {
    let m = topology.m();
    (0..m)
        .map(|v| {
            let mut packets: Vec<usize> = (0..m).filter(|&u| topology.hears(v, u)).collect();
            if mode == RelayMode::Lt {
                packets.extend((0..v).filter(|&u| topology.link(u, v)).map(|u| m + u));
            }
            RetrievalSet { owner: v, packets }
        })
        .collect()
}

/// Packets one relay XORs into its parity packet, excluding the parity itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckSelection {
    pub relay: usize,
    pub selected: Vec<usize>,
}

/// Uniform sample of `min(d, |candidates|)` packets.
pub fn select_random<R: Rng + ?Sized>(
    relay: usize,
    candidates: &[usize],
    d: usize,
    rng: &mut R,
) -> CheckSelection {
    let mut selected: Vec<usize> = candidates
        .choose_multiple(rng, d.min(candidates.len()))
        .copied()
        .collect();
    selected.sort_unstable();
    CheckSelection { relay, selected }
}

/// The `min(d, |candidates|)` least protected packets, ties broken at random.
pub fn select_cwc<R: Rng + ?Sized>(
    relay: usize,
    candidates: &[usize],
    counts: &[usize],
    d: usize,
    rng: &mut R,
) -> CheckSelection {
    let mut order = candidates.to_vec();
    order.shuffle(rng);
    order.sort_by_key(|&p| counts[p]);
    order.truncate(d);
    order.sort_unstable();
    CheckSelection {
        relay,
        selected: order,
    }
}

/// Every user's local count of the checks each packet takes part in.
///
/// A user learns about a check only from headers it hears, and its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectionCounts {
    m: usize,
    views: Vec<Vec<usize>>,
}

impl ProtectionCounts {
    pub fn new(m: usize) -> Self {
        ProtectionCounts {
            m,
            views: vec![vec![0; 2 * m]; m],
        }
    }

    pub fn view(&self, user: usize) -> &[usize] {
        &self.views[user]
    }

    /// Records relay `sel.relay`'s check (its selections plus its own parity
    /// packet) in the view of every user that heard it.
    pub fn record(&mut self, topology: &Topology, sel: &CheckSelection) {
        for v in 0..self.m {
            if topology.hears(v, sel.relay) {
                let view = &mut self.views[v];
                view[self.m + sel.relay] += 1;
                for &p in &sel.selected {
                    view[p] += 1;
                }
            }
        }
    }
}

/// Target weight of relay column `u` in a balanced lower-triangular region:
/// it falls off linearly from `d` for the first relay.
fn relay_target(u: usize, d: usize, m: usize) -> usize {
    d - (u * d) / m
}

/// Earlier relay packets an LT relay adds to its check: those below their
/// target weight in its own view, least protected first, at most `d - 1`.
pub fn relay_fill(rs: &RetrievalSet, view: &[usize], d: usize, m: usize) -> Vec<usize> {
    let mut cands: Vec<usize> = rs
        .relays(m)
        .filter(|&p| view[p] < relay_target(p - m, d, m))
        .collect();
    cands.sort_by_key(|&p| (view[p], p));
    cands.truncate(d.saturating_sub(1));
    cands
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    Random,
    Cwc,
    Dpeg,
}

impl std::str::FromStr for SelectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(SelectionRule::Random),
            "cwc" => Ok(SelectionRule::Cwc),
            "dpeg" => Ok(SelectionRule::Dpeg),
            other => Err(Error::Config(format!("unknown selection rule '{other}'"))),
        }
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionRule::Random => "random",
            SelectionRule::Cwc => "cwc",
            SelectionRule::Dpeg => "dpeg",
        })
    }
}

/// How DPEG breaks ties between equally good variable nodes after comparing
/// estimated degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DpegTieBreak {
    #[default]
    LowestIndex,
    Random,
}

/// Result of a DPEG construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpegOutcome {
    pub base: BaseMatrix,
    pub selections: Vec<CheckSelection>,
    /// Checks that could not reach their target degree.
    pub warnings: Vec<String>,
}

/// Check-rooted progressive edge growth over each relay's local view.
///
/// Relay `j` sees the checks of relays whose headers it heard. For its first
/// source edge it takes the lowest-degree candidate; for every later edge it
/// grows a BFS tree from its own check and connects to the lowest-degree
/// candidate among those farthest away (or not reachable at all). Candidates
/// are source packets of its retrieval set. In LT mode the earlier relay
/// packets chosen by [`relay_fill`] are attached first, so the search sees them.
pub fn dpeg_construct<R: Rng + ?Sized>(
    topology: &Topology,
    retrieval: &[RetrievalSet],
    degrees: &[usize],
    mode: RelayMode,
    tie: DpegTieBreak,
    rng: &mut R,
) -> Result<DpegOutcome> {
    let m = topology.m();
    if retrieval.len() != m || degrees.len() != m {
        return Err(Error::Dimension(format!(
            "{m} users need {m} retrieval sets and check degrees"
        )));
    }
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut selections = Vec::with_capacity(m);
    let mut warnings = Vec::new();
    let mut counts = ProtectionCounts::new(m);

    for j in 0..m {
        let heard: Vec<usize> = (0..j).filter(|&i| topology.hears(j, i)).collect();
        let mut degree = vec![0usize; 2 * m];
        let mut var_checks: Vec<Vec<usize>> = vec![Vec::new(); 2 * m];
        for &i in &heard {
            for &v in &rows[i] {
                degree[v] += 1;
                var_checks[v].push(i);
            }
        }

        let mut current: Vec<usize> = vec![m + j];
        if mode == RelayMode::Lt {
            current.extend(relay_fill(&retrieval[j], counts.view(j), degrees[j], m));
        }
        for &v in &current {
            var_checks[v].push(j);
        }
        let candidates: Vec<usize> = retrieval[j].sources(m).collect();
        let target = degrees[j];
        if target > candidates.len() {
            warnings.push(format!(
                "relay {j}: degree {target} exceeds its {} source packets",
                candidates.len()
            ));
        }

        for k in 0..target.min(candidates.len()) {
            let pool: Vec<usize> = if k == 0 {
                candidates.clone()
            } else {
                farthest_candidates(j, &current, &var_checks, &rows, &candidates)
            };
            let pool: Vec<usize> = pool.into_iter().filter(|v| !current.contains(v)).collect();
            let Some(best_deg) = pool.iter().map(|&v| degree[v]).min() else {
                break;
            };
            let ties: Vec<usize> = pool.into_iter().filter(|&v| degree[v] == best_deg).collect();
            let pick = match tie {
                DpegTieBreak::LowestIndex => ties[0],
                DpegTieBreak::Random => *ties.choose(rng).expect("non-empty ties"),
            };
            current.push(pick);
            var_checks[pick].push(j);
            degree[pick] += 1;
        }

        let mut selected: Vec<usize> = current.iter().copied().filter(|&v| v != m + j).collect();
        selected.sort_unstable();
        let sel = CheckSelection { relay: j, selected };
        counts.record(topology, &sel);
        let mut row = current;
        row.sort_unstable();
        rows.push(row);
        selections.push(sel);
    }
    let base = assemble_base(&selections, m)?;
    Ok(DpegOutcome {
        base,
        selections,
        warnings,
    })
}

/// Candidates at the largest depth reached by a BFS from check `root`, or the
/// unreachable ones when the tree stops growing before covering them all.
fn farthest_candidates(
    root: usize,
    current: &[usize],
    var_checks: &[Vec<usize>],
    rows: &[Vec<usize>],
    candidates: &[usize],
) -> Vec<usize> {
    let nv = var_checks.len();
    let mut seen_var = vec![false; nv];
    let mut seen_check = vec![false; rows.len() + 1];
    seen_check[root] = true;
    let mut frontier: VecDeque<usize> = VecDeque::new();
    for &v in current {
        seen_var[v] = true;
        frontier.push_back(v);
    }
    let outside = |seen: &[bool]| -> Vec<usize> {
        candidates.iter().copied().filter(|&v| !seen[v]).collect()
    };
    loop {
        let complement = outside(&seen_var);
        let mut next = VecDeque::new();
        let mut grown = seen_var.clone();
        while let Some(v) = frontier.pop_front() {
            for &c in &var_checks[v] {
                if c == root || seen_check[c] {
                    continue;
                }
                seen_check[c] = true;
                for &w in &rows[c] {
                    if !grown[w] {
                        grown[w] = true;
                        next.push_back(w);
                    }
                }
            }
        }
        let next_complement = outside(&grown);
        if next.is_empty() || next_complement.is_empty() {
            return complement;
        }
        seen_var = grown;
        frontier = next;
    }
}

/// Row `r` holds the selected packets and the self-parity column `m + r`.
pub fn assemble_base(selections: &[CheckSelection], m: usize) -> Result<BaseMatrix> {
    if selections.len() != m {
        return Err(Error::Dimension(format!(
            "{} selections for {m} relays",
            selections.len()
        )));
    }
    let mut rows = vec![Vec::new(); m];
    for sel in selections {
        if sel.relay >= m {
            return Err(Error::InvalidParameter(format!("relay {} outside {m} users", sel.relay)));
        }
        for &p in &sel.selected {
            if p >= 2 * m {
                return Err(Error::HeaderRange(p));
            }
            if p >= m && p - m >= sel.relay {
                return Err(Error::ForwardReference {
                    relay: sel.relay,
                    packet: p,
                });
            }
        }
        rows[sel.relay] = sel.selected.clone();
    }
    BaseMatrix::from_rows(m, rows)
}

/// Participation bitmap carried by each relay packet. Bit `p` stands for
/// packet `p` (so the least significant bit is the first source packet);
/// the sender's own parity position is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitmapHeader {
    pub mask: u128,
}

impl fmt::LowerHex for BitmapHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.mask, f)
    }
}

/// Largest user count whose `2m`-bit headers fit.
pub const MAX_HEADER_USERS: usize = 64;

pub fn header_encode(selected: &[usize], m: usize) -> Result<BitmapHeader> {
    if m > MAX_HEADER_USERS {
        return Err(Error::InvalidParameter(format!(
            "headers support at most {MAX_HEADER_USERS} users"
        )));
    }
    let mut mask = 0u128;
    for &p in selected {
        if p >= 2 * m {
            return Err(Error::HeaderRange(p));
        }
        mask |= 1u128 << p;
    }
    Ok(BitmapHeader { mask })
}

pub fn header_decode(header: BitmapHeader, m: usize) -> Result<Vec<usize>> {
    if m > MAX_HEADER_USERS {
        return Err(Error::InvalidParameter(format!(
            "headers support at most {MAX_HEADER_USERS} users"
        )));
    }
    let width = 2 * m;
    if width < 128 && header.mask >> width != 0 {
        return Err(Error::HeaderRange(128 - header.mask.leading_zeros() as usize - 1));
    }
    Ok((0..width).filter(|&p| header.mask >> p & 1 == 1).collect())
}

/// The destination's copy of the base matrix, rebuilt from one header per relay.
pub fn reconstruct_base(headers: &[BitmapHeader], m: usize) -> Result<BaseMatrix> {
    let selections = headers
        .iter()
        .enumerate()
        .map(|(relay, &h)| {
            Ok(CheckSelection {
                relay,
                selected: header_decode(h, m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_base(&selections, m)
}

/// Parameters of one cooperation round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundConfig {
    pub m: usize,
    /// Source packets per check.
    pub degree: usize,
    pub ensemble: Ensemble,
    pub rule: SelectionRule,
    pub link: LinkModel,
    pub tie_break: DpegTieBreak,
}

/// Everything one round produces.
#[derive(Debug, Clone)]
pub struct Round {
    pub topology: Topology,
    pub retrieval: Vec<RetrievalSet>,
    pub selections: Vec<CheckSelection>,
    pub base: BaseMatrix,
    pub headers: Vec<BitmapHeader>,
    pub warnings: Vec<String>,
}

/// Runs the selection phase of a round on a given topology.
pub fn build_round<R: Rng + ?Sized>(cfg: &RoundConfig, topology: Topology, rng: &mut R) -> Result<Round> {
    let m = cfg.m;
    if cfg.degree == 0 {
        return Err(Error::InvalidParameter("check degree must be at least 1".into()));
    }
    let mode = RelayMode::from(cfg.ensemble);
    let retrieval = build_retrieval_sets(&topology, mode);
    let (selections, base, warnings) = match cfg.rule {
        SelectionRule::Dpeg => {
            let out = dpeg_construct(
                &topology,
                &retrieval,
                &vec![cfg.degree; m],
                mode,
                cfg.tie_break,
                rng,
            )?;
            (out.selections, out.base, out.warnings)
        }
        rule => {
            let mut counts = ProtectionCounts::new(m);
            let mut selections = Vec::with_capacity(m);
            for (r, rs) in retrieval.iter().enumerate() {
                let sources: Vec<usize> = rs.sources(m).collect();
                let mut sel = match rule {
                    SelectionRule::Random => select_random(r, &sources, cfg.degree, rng),
                    _ => select_cwc(r, &sources, counts.view(r), cfg.degree, rng),
                };
                if mode == RelayMode::Lt {
                    sel.selected.extend(relay_fill(rs, counts.view(r), cfg.degree, m));
                    sel.selected.sort_unstable();
                }
                counts.record(&topology, &sel);
                selections.push(sel);
            }
            let base = assemble_base(&selections, m)?;
            (selections, base, Vec::new())
        }
    };
    let headers = selections
        .iter()
        .map(|s| header_encode(&s.selected, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Round {
        topology,
        retrieval,
        selections,
        base,
        headers,
        warnings,
    })
}

/// Samples a topology with `topology_rng` and runs the selection phase with `selection_rng`.
pub fn run_round<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    cfg: &RoundConfig,
    topology_rng: &mut R1,
    selection_rng: &mut R2,
) -> Result<Round> {
    let topology = sample_topology(cfg.m, cfg.link, topology_rng)?;
    build_round(cfg, topology, selection_rng)
}

/// The five-user topology of the classic worked example, 0-indexed.
pub fn example_topology() -> Topology {
    let links = [
        (4, 1), (5, 1), (1, 2), (3, 2), (5, 2), (1, 3), (2, 3), (5, 3),
        (1, 4), (2, 4), (2, 5), (3, 5), (4, 5),
    ];
    let zero: Vec<(usize, usize)> = links.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
    Topology::from_links(5, &zero).expect("static topology is valid")
}

/// The relay selections of the worked example, 0-indexed.
pub fn example_selections() -> Vec<CheckSelection> {
    let one_indexed: [&[usize]; 5] = [
        &[1, 4, 5],
        &[2, 3, 5, 6],
        &[1, 3, 5, 7],
        &[1, 2, 4, 6],
        &[2, 3, 4, 7, 8, 9],
    ];
    one_indexed
        .iter()
        .enumerate()
        .map(|(relay, s)| CheckSelection {
            relay,
            selected: s.iter().map(|p| p - 1).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn one_indexed(rs: &RetrievalSet) -> Vec<usize> {
        rs.packets.iter().map(|p| p + 1).collect()
    }

    #[test]
    fn example_retrieval_sets() {
        let sets = build_retrieval_sets(&example_topology(), RelayMode::Lt);
        let expected: [&[usize]; 5] = [
            &[1, 4, 5],
            &[1, 2, 3, 5, 6],
            &[1, 2, 3, 5, 6, 7],
            &[1, 2, 4, 6, 7],
            &[2, 3, 4, 5, 7, 8, 9],
        ];
        for (rs, exp) in sets.iter().zip(expected) {
            assert_eq!(one_indexed(rs), exp);
        }
        let ldgm = build_retrieval_sets(&example_topology(), RelayMode::Ldgm);
        for (rs, exp) in ldgm.iter().zip(expected) {
            let filtered: Vec<usize> = exp.iter().copied().filter(|&p| p <= 5).collect();
            assert_eq!(one_indexed(rs), filtered);
        }
    }

    #[test]
    fn empty_topology_keeps_own_packet() {
        for rs in build_retrieval_sets(&Topology::empty(4), RelayMode::Lt) {
            assert_eq!(rs.packets, vec![rs.owner]);
        }
    }

    #[test]
    fn example_base_matrix() {
        let base = assemble_base(&example_selections(), 5).unwrap();
        let expected: Vec<Vec<u8>> = vec![
            vec![1, 0, 0, 1, 1, 1, 0, 0, 0, 0],
            vec![0, 1, 1, 0, 1, 1, 1, 0, 0, 0],
            vec![1, 0, 1, 0, 1, 0, 1, 1, 0, 0],
            vec![1, 1, 0, 1, 0, 1, 0, 0, 1, 0],
            vec![0, 1, 1, 1, 0, 0, 1, 1, 1, 1],
        ];
        assert_eq!(base.to_dense(), expected);
    }

    #[test]
    fn forward_reference_is_rejected() {
        let sel = vec![
            CheckSelection { relay: 0, selected: vec![0, 3] },
            CheckSelection { relay: 1, selected: vec![1] },
        ];
        assert_eq!(
            assemble_base(&sel, 2),
            Err(Error::ForwardReference { relay: 0, packet: 3 })
        );
    }

    #[test]
    fn empty_selections_give_the_diagonal() {
        let sel: Vec<CheckSelection> = (0..3)
            .map(|relay| CheckSelection { relay, selected: vec![] })
            .collect();
        assert_eq!(assemble_base(&sel, 3).unwrap(), BaseMatrix::diagonal(3));
    }

    #[test]
    fn header_examples() {
        let h = header_encode(&[0, 3, 4], 5).unwrap();
        assert_eq!(h.mask, 0x19);
        assert_eq!(header_encode(&[], 5).unwrap().mask, 0);
        assert_eq!(header_encode(&[10], 5), Err(Error::HeaderRange(10)));
        assert!(header_decode(BitmapHeader { mask: 1 << 12 }, 5).is_err());
    }

    #[test]
    fn header_round_trip() {
        let mut rng = rng_from(9);
        for _ in 0..1000 {
            let m = rng.random_range(1..=MAX_HEADER_USERS);
            let set: Vec<usize> = (0..2 * m).filter(|_| rng.random_bool(0.3)).collect();
            let h = header_encode(&set, m).unwrap();
            assert_eq!(header_decode(h, m).unwrap(), set);
        }
    }

    #[test]
    fn destination_rebuilds_the_example() {
        let sel = example_selections();
        let headers: Vec<BitmapHeader> =
            sel.iter().map(|s| header_encode(&s.selected, 5).unwrap()).collect();
        assert_eq!(reconstruct_base(&headers, 5).unwrap(), assemble_base(&sel, 5).unwrap());
    }

    #[test]
    fn link_probability_matches_frequency() {
        let model = LinkModel::Rayleigh { inter_snr: 2.0, gamma_th: 1.0 };
        let p = model.link_probability();
        let mut rng = rng_from(11);
        let (mut up, mut total) = (0usize, 0usize);
        for _ in 0..500 {
            let t = sample_topology(6, model, &mut rng).unwrap();
            up += t.links().len();
            total += 30;
        }
        let freq = up as f64 / total as f64;
        let sigma = (p * (1.0 - p) / total as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * sigma, "freq {freq} vs {p}");
    }

    #[test]
    fn threshold_extremes() {
        let mut rng = rng_from(1);
        let all = sample_topology(4, LinkModel::Rayleigh { inter_snr: 1.0, gamma_th: 0.0 }, &mut rng).unwrap();
        assert_eq!(all, Topology::full(4));
        let none = sample_topology(4, LinkModel::Rayleigh { inter_snr: 0.0, gamma_th: 1.0 }, &mut rng).unwrap();
        assert_eq!(none, Topology::empty(4));
    }

    #[test]
    fn random_selection_marginals() {
        let cands = [0, 1, 2, 3, 4];
        let mut hits = [0usize; 5];
        let mut rng = rng_from(2);
        let trials = 20_000;
        for _ in 0..trials {
            for p in select_random(0, &cands, 2, &mut rng).selected {
                hits[p] += 1;
            }
        }
        let p = 0.4;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for h in hits {
            assert!((h as f64 / trials as f64 - p).abs() < 4.0 * sigma);
        }
        assert_eq!(select_random(0, &[3], 4, &mut rng).selected, vec![3]);
    }

    #[test]
    fn cwc_prefers_least_protected() {
        let mut counts = vec![0; 10];
        counts[0] = 3;
        counts[3] = 0;
        counts[4] = 1;
        let mut rng = rng_from(3);
        assert_eq!(select_cwc(0, &[0, 3, 4], &counts, 2, &mut rng).selected, vec![3, 4]);
        assert_eq!(select_cwc(0, &[0, 3, 4], &[0; 10], 3, &mut rng).selected, vec![0, 3, 4]);
    }

    #[test]
    fn cwc_balances_columns_under_full_connectivity() {
        let mut rng = rng_from(4);
        for m in [5, 8, 10] {
            let cfg = RoundConfig {
                m,
                degree: 3,
                ensemble: Ensemble::Ldgm,
                rule: SelectionRule::Cwc,
                link: LinkModel::Erasure { eps: 0.0 },
                tie_break: DpegTieBreak::LowestIndex,
            };
            let round = build_round(&cfg, Topology::full(m), &mut rng).unwrap();
            let w = &round.base.column_weights()[..m];
            assert!(w.iter().max().unwrap() - w.iter().min().unwrap() <= 1, "{w:?}");
        }
    }

    #[test]
    fn dpeg_hand_trace() {
        let t = Topology::full(3);
        let rs = build_retrieval_sets(&t, RelayMode::Ldgm);
        let mut rng = rng_from(0);
        let out = dpeg_construct(&t, &rs, &[2, 2, 2], RelayMode::Ldgm, DpegTieBreak::LowestIndex, &mut rng)
            .unwrap();
        let sel: Vec<Vec<usize>> = out.selections.iter().map(|s| s.selected.clone()).collect();
        assert_eq!(sel, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn dpeg_is_deterministic() {
        let cfg = RoundConfig {
            m: 8,
            degree: 3,
            ensemble: Ensemble::LtLdpc,
            rule: SelectionRule::Dpeg,
            link: LinkModel::Erasure { eps: 0.2 },
            tie_break: DpegTieBreak::Random,
        };
        let a = run_round(&cfg, &mut rng_from(5), &mut rng_from(6)).unwrap();
        let b = run_round(&cfg, &mut rng_from(5), &mut rng_from(6)).unwrap();
        assert_eq!(a.base, b.base);
        assert!(a.base.is_lower_triangular());
    }

    #[test]
    fn lt_rounds_respect_causality() {
        let mut rng = rng_from(7);
        for rule in [SelectionRule::Random, SelectionRule::Cwc, SelectionRule::Dpeg] {
            let cfg = RoundConfig {
                m: 6,
                degree: 3,
                ensemble: Ensemble::LtLdpc,
                rule,
                link: LinkModel::Erasure { eps: 0.3 },
                tie_break: DpegTieBreak::LowestIndex,
            };
            for _ in 0..20 {
                let round = run_round(&cfg, &mut rng, &mut rng_from(1)).unwrap();
                for rs in &round.retrieval {
                    assert!(rs.relays(6).all(|p| p - 6 < rs.owner));
                }
                for sel in &round.selections {
                    let rs = &round.retrieval[sel.relay];
                    assert!(sel.selected.iter().all(|p| rs.packets.contains(p)));
                }
                assert_eq!(reconstruct_base(&round.headers, 6).unwrap(), round.base);
            }
        }
    }
}
