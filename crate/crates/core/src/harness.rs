//! Monte Carlo sweeps, DE comparisons and CSV output.
//!
//! A trial is one cooperation round: topology, selections, lifting, data,
//! fades and noise all come from streams derived from `(seed, trial)`. The
//! code and the fades of a trial are reused at every SNR point, and the noise
//! is drawn at unit power and scaled, so curves are smooth in SNR and
//! directly comparable across schemes run with the same seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::alist::read_alist;
use crate::channel::{bpsk_modulate, complex_gaussian, n0_from_snr_db, FadingModel};
use crate::codes::{
    embed_channel_codes, encode_network, lift, lift_random_permutations, ChannelCodeSpec, Ensemble,
    LiftedParityMatrix, OffsetTable,
};
use crate::construction::{run_round, DpegTieBreak, LinkModel, Round, RoundConfig, SelectionRule};
use crate::de::{DeModel, PsiKind};
use crate::decoder::{decode_with, DecodeStrategy, IterBudget};
use crate::error::{Error, Result};
use crate::gf2::generate_regular_ldpc;
use crate::seed::{derive, subsystem_rng, trial_seed, Subsystem};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GANCC_OUT_DIR";

/// Output directory from [`OUT_DIR_ENV`], or the current directory.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// How the nonzero off-diagonal base entries are lifted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lifting {
    /// Circulants with offsets `i * j mod N`.
    Circulant,
    /// All identity blocks: the plain per-packet network code.
    Identity,
    /// Independent uniformly random permutations.
    Random,
}

impl std::str::FromStr for Lifting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "circulant" => Ok(Lifting::Circulant),
            "identity" => Ok(Lifting::Identity),
            "random" => Ok(Lifting::Random),
            other => Err(Error::Config(format!("unknown lifting '{other}'"))),
        }
    }
}

impl std::fmt::Display for Lifting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Lifting::Circulant => "circulant",
            Lifting::Identity => "identity",
            Lifting::Random => "random",
        })
    }
}

/// Channel code applied to every source packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelCodeChoice {
    None,
    Regular { wc: usize, wr: usize },
    File(PathBuf),
}

impl std::str::FromStr for ChannelCodeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(ChannelCodeChoice::None);
        }
        if let Some(rest) = s.strip_prefix("regular:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if let [wc, wr] = parts[..] {
                let parse = |x: &str| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad weight '{x}' in channel_code")))
                };
                return Ok(ChannelCodeChoice::Regular { wc: parse(wc)?, wr: parse(wr)? });
            }
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(ChannelCodeChoice::File(PathBuf::from(path.trim())));
        }
        Err(Error::Config(format!(
            "channel_code must be none, regular:wc,wr or file:path, got '{s}'"
        )))
    }
}

impl std::fmt::Display for ChannelCodeChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelCodeChoice::None => f.write_str("none"),
            ChannelCodeChoice::Regular { wc, wr } => write!(f, "regular:{wc},{wr}"),
            ChannelCodeChoice::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Everything a sweep needs. Keys of the text format match the field names.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: String,
    pub m: usize,
    pub packet_len: usize,
    /// `None` means "whatever the channel code gives" (`N` when uncoded).
    pub info_len: Option<usize>,
    pub ensemble: Ensemble,
    pub selection: SelectionRule,
    pub tie_break: DpegTieBreak,
    pub degree: usize,
    pub lifting: Lifting,
    pub fading: FadingModel,
    pub snr_db: Vec<f64>,
    pub inter_snr_db: f64,
    pub gamma_th: f64,
    /// When set, links fail independently with this probability instead of
    /// following the Rayleigh threshold model.
    pub link_erasure: Option<f64>,
    pub decoder: DecodeStrategy,
    pub bp_iters: usize,
    /// Iterations of the joint decoder; defaults to `bp_iters`.
    pub joint_iters: Option<usize>,
    pub trials: usize,
    /// Stop an SNR point once it has this many packet errors (0 disables).
    /// Block-fading errors arrive in whole-packet bursts, so packets are the
    /// better unit for judging statistical weight.
    pub target_errors: u64,
    /// Trials run between stopping checks.
    pub batch: usize,
    pub seed: Option<u64>,
    pub channel_code: ChannelCodeChoice,
    pub de_iters: usize,
    pub de_samples: usize,
    pub psi: PsiKind,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scheme: "gancc".into(),
            m: 5,
            packet_len: 1000,
            info_len: None,
            ensemble: Ensemble::LtLdpc,
            selection: SelectionRule::Cwc,
            tie_break: DpegTieBreak::LowestIndex,
            degree: 3,
            lifting: Lifting::Circulant,
            fading: FadingModel::Block,
            snr_db: vec![10.0],
            inter_snr_db: 20.0,
            gamma_th: 1.0,
            link_erasure: None,
            decoder: DecodeStrategy::Sequential,
            bp_iters: 30,
            joint_iters: None,
            trials: 2000,
            target_errors: 0,
            batch: 50,
            seed: None,
            channel_code: ChannelCodeChoice::None,
            de_iters: 100,
            de_samples: 2000,
            psi: PsiKind::Exact,
            workers: 0,
            out: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
}

/// Parses `a,b,c` or `start:step:stop` (inclusive).
pub fn parse_snr_list(v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    let list = if v.contains(':') {
        let parts: Vec<f64> = v
            .split(':')
            .map(|p| parse_num("snr_db", p))
            .collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(Error::Config("snr_db range must be start:step:stop".into()));
        };
        if step <= 0.0 {
            return Err(Error::Config("snr_db step must be positive".into()));
        }
        let n = ((stop - start) / step + 1e-9).floor() as i64;
        (0..=n.max(-1)).map(|k| start + k as f64 * step).collect()
    } else {
        v.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| parse_num("snr_db", p))
            .collect::<Result<Vec<f64>>>()?
    };
    if list.is_empty() {
        return Err(Error::Config("snr_db list is empty".into()));
    }
    Ok(list)
}

impl SimConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "scheme" => self.scheme = v.to_string(),
            "m" => self.m = parse_num(key, v)?,
            "packet_len" | "n" => self.packet_len = parse_num(key, v)?,
            "info_len" => {
                self.info_len = if v.eq_ignore_ascii_case("uncoded") || v.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_num(key, v)?)
                }
            }
            "ensemble" => self.ensemble = v.parse()?,
            "selection" => self.selection = v.parse()?,
            "tie_break" => {
                self.tie_break = match v.to_ascii_lowercase().as_str() {
                    "lowest" | "lowest-index" | "index" => DpegTieBreak::LowestIndex,
                    "random" => DpegTieBreak::Random,
                    _ => return Err(Error::Config(format!("unknown tie_break '{v}'"))),
                }
            }
            "degree" | "d" => self.degree = parse_num(key, v)?,
            "lifting" => self.lifting = v.parse()?,
            "fading" => self.fading = v.parse()?,
            "snr_db" => self.snr_db = parse_snr_list(v)?,
            "inter_snr_db" => self.inter_snr_db = parse_num(key, v)?,
            "gamma_th" => self.gamma_th = parse_num(key, v)?,
            "link_erasure" => {
                self.link_erasure = if v.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(parse_num(key, v)?)
                }
            }
            "decoder" => self.decoder = v.parse()?,
            "bp_iters" => self.bp_iters = parse_num(key, v)?,
            "joint_iters" => self.joint_iters = Some(parse_num(key, v)?),
            "trials" => self.trials = parse_num(key, v)?,
            "target_errors" => self.target_errors = parse_num(key, v)?,
            "batch" => self.batch = parse_num(key, v)?,
            "seed" => self.seed = Some(parse_num(key, v)?),
            "channel_code" => self.channel_code = v.parse()?,
            "de_iters" => self.de_iters = parse_num(key, v)?,
            "de_samples" => self.de_samples = parse_num(key, v)?,
            "psi" => self.psi = v.parse()?,
            "workers" => self.workers = parse_num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
            cfg.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    /// Applies `--key value` pairs on top of the current values.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, args: &[S]) -> Result<()> {
        let mut it = args.iter().map(AsRef::as_ref);
        while let Some(flag) = it.next() {
            let key = flag
                .strip_prefix("--")
                .ok_or_else(|| Error::Config(format!("expected --key, got '{flag}'")))?;
            let (key, value) = match key.split_once('=') {
                Some((k, v)) => (k, v.to_string()),
                None => (
                    key,
                    it.next()
                        .ok_or_else(|| Error::Config(format!("--{key} needs a value")))?
                        .to_string(),
                ),
            };
            self.set(key, &value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("packet_len", self.packet_len),
            ("degree", self.degree),
            ("bp_iters", self.bp_iters),
            ("trials", self.trials),
            ("batch", self.batch),
        ];
        if let Some((k, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{k} must be positive")));
        }
        if self.m < 2 {
            return Err(Error::Config("m must be at least 2".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("snr_db list is empty".into()));
        }
        if let Some(eps) = self.link_erasure {
            if !(0.0..=1.0).contains(&eps) {
                return Err(Error::Config("link_erasure must be in [0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn link_model(&self) -> LinkModel {
        match self.link_erasure {
            Some(eps) => LinkModel::Erasure { eps },
            None => LinkModel::Rayleigh {
                inter_snr: 10f64.powf(self.inter_snr_db / 10.0),
                gamma_th: self.gamma_th,
            },
        }
    }

    pub fn round_config(&self) -> RoundConfig {
        RoundConfig {
            m: self.m,
            degree: self.degree,
            ensemble: self.ensemble,
            rule: self.selection,
            link: self.link_model(),
            tie_break: self.tie_break,
        }
    }

    pub fn budget(&self) -> IterBudget {
        IterBudget {
            network: self.bp_iters,
            channel: self.bp_iters,
            joint: self.joint_iters.unwrap_or(self.bp_iters),
        }
    }

    fn seed_or_err(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (set seed or pass --seed)".into()))
    }

    /// Builds the per-user channel codes. Generated codes are fixed for the sweep.
    pub fn channel_specs(&self) -> Result<Vec<ChannelCodeSpec>> {
        let n = self.packet_len;
        let specs: Vec<ChannelCodeSpec> = match &self.channel_code {
            ChannelCodeChoice::None => (0..self.m).map(|_| ChannelCodeSpec::uncoded(n)).collect(),
            ChannelCodeChoice::Regular { wc, wr } => {
                let base = derive(self.seed_or_err()?, &[u64::MAX, Subsystem::ChannelCode as u64]);
                (0..self.m)
                    .map(|u| {
                        generate_regular_ldpc(n, *wc, *wr, derive(base, &[u as u64]))
                            .map(ChannelCodeSpec::from_parity_check)
                    })
                    .collect::<Result<_>>()?
            }
            ChannelCodeChoice::File(path) => {
                let h = read_alist(std::io::BufReader::new(std::fs::File::open(path)?))?;
                if h.n_cols() != n {
                    return Err(Error::Config(format!(
                        "channel code in {} has length {}, packets have {n} bits",
                        path.display(),
                        h.n_cols()
                    )));
                }
                let spec = ChannelCodeSpec::from_parity_check(h);
                vec![spec; self.m]
            }
        };
        if let Some(k) = self.info_len {
            if let Some(bad) = specs.iter().position(|s| s.k() != k) {
                return Err(Error::Config(format!(
                    "info_len = {k} but user {bad}'s code carries {} information bits",
                    specs[bad].k()
                )));
            }
        }
        Ok(specs)
    }
}

/// Error counts of one trial at one SNR.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCounts {
    pub bit_errors: u64,
    pub bits: u64,
    pub pkt_errors: u64,
    pub pkts: u64,
}

impl std::ops::AddAssign for TrialCounts {
    fn add_assign(&mut self, o: Self) {
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        self.pkt_errors += o.pkt_errors;
        self.pkts += o.pkts;
    }
}

/// The SNR-independent part of a trial: code, codeword and channel draws.
pub struct TrialSetup {
    pub round: Round,
    pub network: LiftedParityMatrix,
    pub unified: LiftedParityMatrix,
    pub info: Vec<Vec<u8>>,
    pub codeword: Vec<u8>,
    pub alpha: Vec<Complex64>,
    /// Unit-power complex noise, one sample per transmitted bit.
    pub noise: Vec<Complex64>,
}

/// Lifts a base matrix as configured.
pub fn lift_round<R: Rng + ?Sized>(
    cfg: &SimConfig,
    round: &Round,
    rng: &mut R,
) -> Result<LiftedParityMatrix> {
    let n = cfg.packet_len;
    match cfg.lifting {
        Lifting::Circulant => lift(&round.base, n, cfg.ensemble, &OffsetTable::product_scheme(&round.base, n)),
        Lifting::Identity => lift(&round.base, n, cfg.ensemble, &OffsetTable::identity(&round.base)),
        Lifting::Random => lift_random_permutations(&round.base, n, cfg.ensemble, rng),
    }
}

/// Builds trial `trial`'s code, data and channel draws.
pub fn prepare_trial(cfg: &SimConfig, specs: &[ChannelCodeSpec], seed: u64, trial: u64) -> Result<TrialSetup> {
    let ts = trial_seed(seed, trial);
    let round = run_round(
        &cfg.round_config(),
        &mut subsystem_rng(ts, Subsystem::Topology),
        &mut subsystem_rng(ts, Subsystem::Selection),
    )?;
    let network = lift_round(cfg, &round, &mut subsystem_rng(ts, Subsystem::Lifting))?;
    let unified = embed_channel_codes(&network, specs)?;

    let mut data_rng = subsystem_rng(ts, Subsystem::Data);
    let info: Vec<Vec<u8>> = specs
        .iter()
        .map(|s| (0..s.k()).map(|_| data_rng.random::<bool>() as u8).collect())
        .collect();
    let sources = specs
        .iter()
        .zip(&info)
        .map(|(s, i)| s.encode(i))
        .collect::<Result<Vec<_>>>()?;
    let relays = encode_network(&network, &sources)?;
    let codeword: Vec<u8> = sources.into_iter().chain(relays).flatten().collect();

    let n = cfg.packet_len;
    let m = cfg.m;
    let len = codeword.len();
    let mut fade_rng = subsystem_rng(ts, Subsystem::Fading);
    let alpha: Vec<Complex64> = match cfg.fading {
        FadingModel::Block => {
            let per_user: Vec<Complex64> = (0..m).map(|_| complex_gaussian(&mut fade_rng)).collect();
            // Column block b belongs to user b mod m (source blocks, then relay blocks).
            (0..len).map(|k| per_user[(k / n) % m]).collect()
        }
        FadingModel::Iid => (0..len).map(|_| complex_gaussian(&mut fade_rng)).collect(),
    };
    let mut noise_rng = subsystem_rng(ts, Subsystem::Noise);
    let noise = (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut noise_rng);
            let im: f64 = StandardNormal.sample(&mut noise_rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    Ok(TrialSetup {
        round,
        network,
        unified,
        info,
        codeword,
        alpha,
        noise,
    })
}

/// Channel LLRs of a prepared trial at one SNR.
pub fn trial_llrs(setup: &TrialSetup, snr_db: f64) -> Vec<f64> {
    let n0 = n0_from_snr_db(snr_db);
    let s = n0.sqrt();
    bpsk_modulate(&setup.codeword)
        .iter()
        .zip(&setup.alpha)
        .zip(&setup.noise)
        .map(|((&x, &a), &z)| {
            let y = a * x + z * s;
            4.0 * (a.conj() * y).re / n0
        })
        .collect()
}

/// Decodes a prepared trial at one SNR and counts information-bit errors.
pub fn decode_trial(cfg: &SimConfig, specs: &[ChannelCodeSpec], setup: &TrialSetup, snr_db: f64) -> Result<TrialCounts> {
    let llr = trial_llrs(setup, snr_db);
    let res = decode_with(cfg.decoder, &setup.network, &setup.unified, specs, &llr, cfg.budget())?;
    let n = cfg.packet_len;
    let mut c = TrialCounts::default();
    for (u, spec) in specs.iter().enumerate() {
        let decoded = spec.extract_info(&res.hard[u * n..(u + 1) * n]);
        let errs = decoded
            .iter()
            .zip(&setup.info[u])
            .filter(|(a, b)| a != b)
            .count() as u64;
        c.bit_errors += errs;
        c.bits += spec.k() as u64;
        c.pkt_errors += u64::from(errs > 0);
        c.pkts += 1;
    }
    Ok(c)
}

/// One full trial at one SNR.
pub fn run_trial(cfg: &SimConfig, specs: &[ChannelCodeSpec], seed: u64, trial: u64, snr_db: f64) -> Result<TrialCounts> {
    let setup = prepare_trial(cfg, specs, seed, trial)?;
    decode_trial(cfg, specs, &setup, snr_db)
}

/// Aggregate for one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub snr_db: f64,
    pub trials: u64,
    pub counts: TrialCounts,
    pub wall_time: Duration,
}

impl PointResult {
    pub fn ber(&self) -> f64 {
        ratio(self.counts.bit_errors, self.counts.bits)
    }

    pub fn per(&self) -> f64 {
        ratio(self.counts.pkt_errors, self.counts.pkts)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub config: SimConfig,
    pub points: Vec<PointResult>,
}

pub const CSV_HEADER: &str =
    "scheme,ensemble,selection,decoder,m,N,snr_db,trials,bit_errors,bits,ber,pkt_errors,pkts,per";

impl SimResult {
    pub fn to_csv(&self, header: bool) -> String {
        let c = &self.config;
        let mut s = String::new();
        if header {
            s.push_str(CSV_HEADER);
            s.push('\n');
        }
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{:.6e},{},{},{:.6e}",
                c.scheme,
                c.ensemble,
                c.selection,
                c.decoder,
                c.m,
                c.packet_len,
                p.snr_db,
                p.trials,
                p.counts.bit_errors,
                p.counts.bits,
                p.ber(),
                p.counts.pkt_errors,
                p.counts.pkts,
                p.per()
            );
        }
        s
    }

    pub fn ber_curve(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.snr_db, p.ber())).collect()
    }

    pub fn per_curve(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.snr_db, p.per())).collect()
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every SNR point for `trials` trials (fewer when `target_errors` is
/// reached), building each trial's code once for all SNR points.
pub fn run_sweep(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let seed = cfg.seed_or_err()?;
    let specs = cfg.channel_specs()?;
    let npts = cfg.snr_db.len();
    let mut points: Vec<PointResult> = cfg
        .snr_db
        .iter()
        .map(|&snr_db| PointResult {
            snr_db,
            trials: 0,
            counts: TrialCounts::default(),
            wall_time: Duration::ZERO,
        })
        .collect();
    let mut active = vec![true; npts];
    let mut next = 0usize;
    while next < cfg.trials && active.iter().any(|&a| a) {
        let end = (next + cfg.batch).min(cfg.trials);
        let live: Vec<usize> = (0..npts).filter(|&i| active[i]).collect();
        let batch: Vec<Vec<(TrialCounts, Duration)>> = with_pool(cfg.workers, || {
            (next..end)
                .into_par_iter()
                .map(|t| -> Result<Vec<(TrialCounts, Duration)>> {
                    let setup = prepare_trial(cfg, &specs, seed, t as u64)?;
                    live.iter()
                        .map(|&i| {
                            let start = Instant::now();
                            let c = decode_trial(cfg, &specs, &setup, cfg.snr_db[i])?;
                            Ok((c, start.elapsed()))
                        })
                        .collect()
                })
                .collect::<Result<Vec<_>>>()
        })??;
        for trial in batch {
            for (&i, (c, dt)) in live.iter().zip(trial) {
                points[i].counts += c;
                points[i].trials += 1;
                points[i].wall_time += dt;
            }
        }
        if cfg.target_errors > 0 {
            for &i in &live {
                if points[i].counts.pkt_errors >= cfg.target_errors {
                    active[i] = false;
                }
            }
        }
        next = end;
    }
    Ok(SimResult {
        config: cfg.clone(),
        points,
    })
}

/// Writes a result as CSV, creating parent directories.
pub fn write_csv(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Predicted BER of the configured ensemble at every SNR point.
pub fn de_curve(cfg: &SimConfig) -> Result<Vec<(f64, f64)>> {
    if cfg.channel_code != ChannelCodeChoice::None {
        return Err(Error::Config(
            "density evolution covers uncoded source packets only".into(),
        ));
    }
    let model = DeModel {
        ensemble: cfg.ensemble,
        degree: cfg.degree,
        iters: cfg.de_iters,
        kind: cfg.psi,
    };
    let seed = derive(cfg.seed.unwrap_or(0), &[u64::MAX - 1]);
    cfg.snr_db
        .iter()
        .map(|&snr| Ok((snr, model.predict(snr, cfg.fading, cfg.m, cfg.de_samples, seed)?)))
        .collect()
}

/// Simulated and predicted BER on one SNR grid.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub sim: SimResult,
    pub de: Vec<(f64, f64)>,
}

pub const COMPARE_HEADER: &str = "scheme,ensemble,fading,m,N,snr_db,sim_ber,de_ber";

impl Comparison {
    pub fn to_csv(&self) -> String {
        let c = &self.sim.config;
        let mut s = String::from(COMPARE_HEADER);
        s.push('\n');
        for (p, (_, de)) in self.sim.points.iter().zip(&self.de) {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:.6e},{:.6e}",
                c.scheme, c.ensemble, c.fading, c.m, c.packet_len, p.snr_db, p.ber(), de
            );
        }
        s
    }

    /// Largest horizontal distance between the curves over the given BER levels.
    pub fn max_gap_db(&self, levels: &[f64]) -> Option<f64> {
        let sim = self.sim.ber_curve();
        levels
            .iter()
            .filter_map(|&l| Some((snr_at_level(&sim, l)? - snr_at_level(&self.de, l)?).abs()))
            .reduce(f64::max)
    }
}

pub fn compare_de(cfg: &SimConfig) -> Result<Comparison> {
    let de = de_curve(cfg)?;
    let sim = run_sweep(cfg)?;
    Ok(Comparison { sim, de })
}

/// SNR where a decreasing curve first falls to `level`, interpolating
/// `log10(value)` linearly between the bracketing points.
pub fn snr_at_level(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    let lg = |v: f64| v.max(1e-300).log10();
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0.is_nan() || y1.is_nan() {
            return None;
        }
        if y0 >= level && y1 < level {
            if y1 <= 0.0 {
                // No errors seen at x1: fall back to the bracket midpoint in log space.
                return Some(x0 + (x1 - x0) * 0.5);
            }
            let t = (lg(y0) - lg(level)) / (lg(y0) - lg(y1));
            Some(x0 + t * (x1 - x0))
        } else {
            None
        }
    })
}

/// Per-scheme results keyed by scheme name, for multi-curve experiments.
pub type CurveSet = BTreeMap<String, SimResult>;

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            m: 3,
            packet_len: 64,
            trials: 3,
            snr_db: vec![2.0, 60.0],
            seed: Some(5),
            batch: 2,
            ..SimConfig::default()
        }
    }

    #[test]
    fn parses_text_and_overrides() {
        let text = "# demo\nm = 4\npacket_len = 128\nensemble = ec-ldgm\nsnr_db = 0:2:6\ndecoder = iterative:5\nchannel_code = regular:3,6\n";
        let mut c = SimConfig::parse_str(text).unwrap();
        assert_eq!(c.m, 4);
        assert_eq!(c.snr_db, vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(c.decoder, DecodeStrategy::IterativeGlobal(5));
        assert_eq!(c.channel_code, ChannelCodeChoice::Regular { wc: 3, wr: 6 });
        c.apply_overrides(&["--seed", "9", "--m=6"]).unwrap();
        assert_eq!((c.seed, c.m), (Some(9), 6));
        assert!(SimConfig::parse_str("bogus = 1").is_err());
        assert!(SimConfig::parse_str("m 5").is_err());
        assert!(c.apply_overrides(&["--trials"]).is_err());
    }

    #[test]
    fn seed_is_mandatory() {
        let mut c = small();
        c.seed = None;
        assert!(run_sweep(&c).is_err());
    }

    #[test]
    fn noiseless_trial_is_error_free_and_deterministic() {
        let c = small();
        let specs = c.channel_specs().unwrap();
        let a = run_trial(&c, &specs, 5, 0, 60.0).unwrap();
        assert_eq!(a.bit_errors, 0);
        assert_eq!(a, run_trial(&c, &specs, 5, 0, 60.0).unwrap());
        let low = run_trial(&c, &specs, 5, 0, -5.0).unwrap();
        assert_eq!(low, run_trial(&c, &specs, 5, 0, -5.0).unwrap());
    }

    #[test]
    fn codewords_satisfy_the_unified_checks() {
        for ens in [Ensemble::Ldgm, Ensemble::LtLdpc, Ensemble::EcLdgm] {
            for lifting in [Lifting::Circulant, Lifting::Identity, Lifting::Random] {
                let c = SimConfig {
                    ensemble: ens,
                    lifting,
                    channel_code: ChannelCodeChoice::Regular { wc: 3, wr: 6 },
                    ..small()
                };
                let specs = c.channel_specs().unwrap();
                let s = prepare_trial(&c, &specs, 5, 1).unwrap();
                assert!(s.unified.syndrome_is_zero(&s.codeword).unwrap(), "{ens} {lifting}");
            }
        }
    }

    #[test]
    fn sweep_conservation_and_csv() {
        let c = small();
        let r = run_sweep(&c).unwrap();
        for p in &r.points {
            assert_eq!(p.trials, 3);
            assert_eq!(p.counts.bits, 3 * 3 * 64);
            assert_eq!(p.counts.pkts, 3 * 3);
        }
        let csv = r.to_csv(true);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with(CSV_HEADER));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = small();
        c.trials = 6;
        c.workers = 1;
        let a = run_sweep(&c).unwrap().to_csv(true);
        c.workers = 4;
        let b = run_sweep(&c).unwrap().to_csv(true);
        assert_eq!(a, b);
    }

    #[test]
    fn target_errors_stops_a_point() {
        let c = SimConfig {
            trials: 10,
            target_errors: 1,
            snr_db: vec![-10.0],
            ..small()
        };
        let r = run_sweep(&c).unwrap();
        assert_eq!(r.points[0].trials, 2);
    }

    #[test]
    fn level_crossing() {
        let curve = [(0.0, 1e-1), (2.0, 1e-2), (4.0, 1e-4)];
        assert!((snr_at_level(&curve, 1e-2).unwrap() - 2.0).abs() < 1e-12);
        assert!((snr_at_level(&curve, 1e-3).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(snr_at_level(&curve, 1e-6), None);
    }

    #[test]
    fn de_rejects_coded_packets() {
        let c = SimConfig {
            channel_code: ChannelCodeChoice::Regular { wc: 3, wr: 6 },
            ..small()
        };
        assert!(de_curve(&c).is_err());
        let one = SimConfig { snr_db: vec![8.0], de_samples: 20, ..small() };
        assert_eq!(de_curve(&one).unwrap().len(), 1);
    }
}
