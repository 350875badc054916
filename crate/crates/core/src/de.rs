//! Gaussian-approximation density evolution over m-cyclic fading channels.
//!
//! Messages are tracked by their mean only (variance is twice the mean).
//! Internally the recursions work with `ln phi(mu)` where `phi = 1 - Psi`, so
//! that products of `Psi` values close to one keep their precision.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::channel::FadingModel;
use crate::codes::Ensemble;
use crate::error::{Error, Result};
use crate::seed::derive;

/// Means are capped here; reaching the cap counts as successful decoding.
pub const MU_CAP: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiApprox {
    /// `1 - exp(-0.4527 mu^0.86 + 0.0218)`, stated for `0 < mu <= 10`.
    A,
    /// `1 - exp(-0.432 mu^0.88)`.
    B,
}

/// Which `Psi` the recursions use. `Exact` is served from a precomputed table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiKind {
    #[default]
    Exact,
    Approx(PsiApprox),
}

impl std::str::FromStr for PsiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(PsiKind::Exact),
            "a" | "approx-a" => Ok(PsiKind::Approx(PsiApprox::A)),
            "b" | "approx-b" => Ok(PsiKind::Approx(PsiApprox::B)),
            other => Err(Error::Config(format!("unknown psi kind '{other}'"))),
        }
    }
}

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln phi(mu)` by quadrature, where `phi(mu) = E[2 / (1 + e^x)]`, `x ~ N(mu, 2 mu)`.
///
/// The log-integrand is concave, so it is integrated around its mode over a
/// range that covers the tails to `exp(-72)`.
fn ln_phi_quadrature(mu: f64) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let var = 2.0 * mu;
    let g = |x: f64| std::f64::consts::LN_2 - softplus(x) - (x - mu) * (x - mu) / (2.0 * var);
    // g'(x) = -sigmoid(x) - (x - mu)/var is decreasing; its root is in [-mu, mu].
    let (mut lo, mut hi) = (-mu, mu);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if -sigmoid(mid) - (mid - mu) / var > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + mid.abs()) {
            break;
        }
    }
    let mode = 0.5 * (lo + hi);
    let s = sigmoid(mode);
    let width = 1.0 / (s * (1.0 - s) + 1.0 / var).sqrt();
    let reach = 12.0 * var.sqrt();
    let panels = ((2.0 * reach / width).ceil() as usize).clamp(16, 20_000);
    let h = 2.0 * reach / panels as f64;
    let gmax = g(mode);
    let mut acc = 0.0;
    for p in 0..panels {
        let c = mode - reach + (p as f64 + 0.5) * h;
        for (&t, &w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            let dx = 0.5 * h * t;
            acc += w * ((g(c - dx) - gmax).exp() + (g(c + dx) - gmax).exp());
        }
    }
    let integral = acc * 0.5 * h;
    gmax + integral.ln() - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
}

/// `Psi(mu) = E[tanh(x/2)]` for `x ~ N(mu, 2 mu)`, by numerical quadrature.
pub fn psi_exact(mu: f64) -> Result<f64> {
    if mu.is_nan() || mu < 0.0 {
        return Err(Error::InvalidParameter(format!("Psi needs mu >= 0, got {mu}")));
    }
    if mu < 1e-4 {
        return Ok(mu / 2.0 - mu * mu / 4.0 + 5.0 * mu * mu * mu / 24.0);
    }
    Ok(-ln_phi_quadrature(mu).exp_m1())
}

/// Closed-form approximations of `Psi`.
pub fn psi_approx(mu: f64, variant: PsiApprox) -> Result<f64> {
    if mu.is_nan() || mu < 0.0 {
        return Err(Error::InvalidParameter(format!("Psi needs mu >= 0, got {mu}")));
    }
    if variant == PsiApprox::A && mu > 10.0 {
        return Err(Error::InvalidParameter(format!(
            "approximation A is only valid for mu <= 10, got {mu}"
        )));
    }
    Ok(-ln_phi_approx(mu, variant).exp_m1())
}

fn ln_phi_approx(mu: f64, variant: PsiApprox) -> f64 {
    match variant {
        PsiApprox::A if mu == 0.0 => 0.0,
        PsiApprox::A => -0.4527 * mu.powf(0.86) + 0.0218,
        PsiApprox::B => -0.432 * mu.powf(0.88),
    }
}

const TABLE_STEP: f64 = 0.01;

/// `ln phi` sampled on a uniform grid in `s = sqrt(mu)` up to the cap.
fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = (MU_CAP.sqrt() / TABLE_STEP).round() as usize;
        (0..=n)
            .map(|k| {
                let s = k as f64 * TABLE_STEP;
                let mu = s * s;
                if mu < 1e-4 {
                    (-psi_exact(mu).expect("non-negative")).ln_1p()
                } else {
                    ln_phi_quadrature(mu)
                }
            })
            .collect()
    })
}

/// Cubic (Catmull-Rom) interpolation of the table; `ln phi` is even in `s`.
fn ln_phi_table(mu: f64) -> f64 {
    let t = table();
    let last = t.len() - 1;
    let s = mu.sqrt();
    let x = s / TABLE_STEP;
    if x >= last as f64 {
        // Beyond the cap `ln phi` falls off like -mu/4.
        return t[last] - (mu - MU_CAP) / 4.0;
    }
    let k = x.floor() as usize;
    let f = x - k as f64;
    let at = |i: isize| -> f64 { t[i.unsigned_abs().min(last)] };
    let (p0, p1, p2, p3) = (at(k as isize - 1), at(k as isize), at(k as isize + 1), at(k as isize + 2));
    p1 + 0.5
        * f
        * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)))
}

/// `ln(1 - Psi(mu))` for the chosen kind.
pub fn ln_phi(mu: f64, kind: PsiKind) -> f64 {
    match kind {
        PsiKind::Exact => ln_phi_table(mu),
        PsiKind::Approx(v) => ln_phi_approx(mu, v),
    }
}

/// `Psi(mu)` for the chosen kind, without domain checks on approximation A.
pub fn psi(mu: f64, kind: PsiKind) -> f64 {
    -ln_phi(mu, kind).exp_m1()
}

/// Smallest `mu` in `[0, MU_CAP]` with `ln phi(mu) <= target`, by bisection.
fn ln_phi_inv(target: f64, kind: PsiKind) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    if ln_phi(MU_CAP, kind) >= target {
        return MU_CAP;
    }
    // Bisect on s = sqrt(mu); ln phi is decreasing in s.
    let (mut lo, mut hi) = (0.0f64, MU_CAP.sqrt());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid * mid, kind) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    s * s
}

/// Inverse of `Psi` for the chosen kind, capped at [`MU_CAP`].
pub fn psi_inv(y: f64, kind: PsiKind) -> Result<f64> {
    if !(0.0..1.0).contains(&y) {
        return Err(Error::InvalidParameter(format!("Psi^-1 needs 0 <= y < 1, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    Ok(ln_phi_inv((-y).ln_1p(), kind))
}

/// `ln(1 - (1 - e^a)^k)`: the `ln phi` of a product of `k` Psi-values with `ln phi = a`.
fn ln_phi_power(a: f64, k: f64) -> f64 {
    if k == 0.0 {
        return f64::NEG_INFINITY;
    }
    if a < -30.0 {
        // 1 - (1 - p)^k ~ k p for tiny p.
        return k.ln() + a;
    }
    let l = k * (-a.exp()).ln_1p();
    (-l.exp_m1()).ln()
}

/// `ln phi` of the product of two Psi-values given by their `ln phi`.
fn ln_phi_product(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    // 1 - (1-p)(1-q) = p + q - pq.
    let l = (-a.exp()).ln_1p() + (-b.exp()).ln_1p();
    if l > -1e-12 {
        let hi = a.max(b);
        let lo = a.min(b);
        return hi + (lo - hi).exp().ln_1p();
    }
    (-l.exp_m1()).ln()
}

/// `ln` of a weighted mixture of phi-values.
fn ln_mix(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let terms: Vec<(f64, f64)> = terms.filter(|&(w, _)| w > 0.0).collect();
    let top = terms.iter().map(|&(_, l)| l).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.iter().map(|&(w, l)| w * (l - top).exp()).sum::<f64>().ln()
}

/// Tail of the standard normal.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Edge-perspective variable (`lambda`) and check (`rho`) degree
/// distributions, and the node-perspective distribution of systematic
/// variable degrees (`xi`). Entries are `(degree, fraction)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeProfile {
    pub lambda: Vec<(usize, f64)>,
    pub rho: Vec<(usize, f64)>,
    pub xi: Vec<(usize, f64)>,
}

impl DegreeProfile {
    pub fn regular(dv: usize, dc: usize) -> Self {
        DegreeProfile {
            lambda: vec![(dv, 1.0)],
            rho: vec![(dc, 1.0)],
            xi: vec![(dv, 1.0)],
        }
    }

    pub fn max_var_degree(&self) -> usize {
        self.lambda.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }

    pub fn max_check_degree(&self) -> usize {
        self.rho.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }
}

/// Rate-1/2 degree-`D` profiles.
///
/// The LT-LDPC check profile keeps the `(j - D)` shape and is normalised by
/// `D(D+1)/2` so it sums to one.
pub fn degree_profile(ensemble: Ensemble, d: usize) -> Result<DegreeProfile> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("degree D must be at least 2, got {d}")));
    }
    let df = d as f64;
    match ensemble {
        Ensemble::Ldgm => Ok(DegreeProfile {
            lambda: vec![(1, 1.0 / (1.0 + df)), (d, df / (1.0 + df))],
            rho: vec![(d + 1, 1.0)],
            xi: vec![(d, 1.0)],
        }),
        Ensemble::LtLdpc => {
            let mut lambda: Vec<(usize, f64)> = (1..d)
                .map(|i| (i, 2.0 * i as f64 / (df * (3.0 * df + 1.0))))
                .collect();
            lambda.push((d, 2.0 * (df + 1.0) / (3.0 * df + 1.0)));
            let rho = (d + 1..=2 * d)
                .map(|j| (j, 2.0 * (j - d) as f64 / (df * (df + 1.0))))
                .collect();
            Ok(DegreeProfile {
                lambda,
                rho,
                xi: vec![(d, 1.0)],
            })
        }
        Ensemble::EcLdgm => Err(Error::InvalidParameter(
            "EC-LDGM is analysed by its own recursion, not a single profile".into(),
        )),
    }
}

/// `ln phi` of the variable-to-check message mixed over `lambda` and the channels.
fn ln_phi_var_mix(lambda: &[(usize, f64)], mu_u0: &[f64], mu_u: f64, kind: PsiKind) -> f64 {
    let wq = 1.0 / mu_u0.len() as f64;
    ln_mix(lambda.iter().flat_map(|&(i, l)| {
        mu_u0
            .iter()
            .map(move |&m0| (l * wq, ln_phi(m0 + (i as f64 - 1.0) * mu_u, kind)))
    }))
}

fn check_finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Divergence(format!("{what} became {x}")))
    }
}

/// Check-to-variable means `mu_u^(0..=iters)` of the general recursion.
pub fn de_general(profile: &DegreeProfile, mu_u0: &[f64], iters: usize, kind: PsiKind) -> Result<Vec<f64>> {
    if mu_u0.is_empty() {
        return Err(Error::InvalidParameter("at least one channel is needed".into()));
    }
    if mu_u0.iter().any(|&m| m.is_nan() || m < 0.0) {
        return Err(Error::InvalidParameter("channel means must be non-negative".into()));
    }
    let mut traj = Vec::with_capacity(iters + 1);
    let mut mu = 0.0;
    traj.push(mu);
    for _ in 0..iters {
        if mu >= MU_CAP {
            traj.push(MU_CAP);
            continue;
        }
        let a = ln_phi_var_mix(&profile.lambda, mu_u0, mu, kind);
        let next: f64 = profile
            .rho
            .iter()
            .map(|&(j, r)| r * ln_phi_inv(ln_phi_power(a, j as f64 - 1.0), kind))
            .sum();
        mu = check_finite(next, "check message mean")?.min(MU_CAP);
        traj.push(mu);
    }
    Ok(traj)
}

/// Bit error probability of systematic nodes given the check-to-variable mean.
pub fn error_prob(profile: &DegreeProfile, mu_u: f64, mu_u0: &[f64]) -> f64 {
    let wq = 1.0 / mu_u0.len() as f64;
    profile
        .xi
        .iter()
        .map(|&(i, x)| {
            x * wq
                * mu_u0
                    .iter()
                    .map(|&m0| q_function((0.5 * (m0 + i as f64 * mu_u)).sqrt()))
                    .sum::<f64>()
        })
        .sum()
}

/// Bit error probability after `iters` iterations of the general recursion.
pub fn pe_general(profile: &DegreeProfile, mu_u0: &[f64], iters: usize, kind: PsiKind) -> Result<f64> {
    let traj = de_general(profile, mu_u0, iters, kind)?;
    Ok(error_prob(profile, *traj.last().expect("non-empty"), mu_u0))
}

/// Parameters of the EC-LDGM recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct EcLdgmParams {
    /// Systematic bits per check.
    pub check_degree: usize,
    /// Edge-perspective systematic variable degrees.
    pub lambda_s: Vec<(usize, f64)>,
    /// Node-perspective systematic variable degrees.
    pub xi: Vec<(usize, f64)>,
    /// Include the zigzag parity factors. Without them the recursion is the
    /// plain LDGM-style one over systematic nodes.
    pub parity_coupling: bool,
    /// Block: one parity state per user. IID: every entry of `mu_u0` is an
    /// equally likely fade and the parity state is shared.
    pub fading: FadingModel,
}

impl EcLdgmParams {
    /// Regular degree-`D` code: every systematic node sits in `D` checks of `D` systematic bits.
    pub fn regular(d: usize, fading: FadingModel) -> Self {
        EcLdgmParams {
            check_degree: d,
            lambda_s: vec![(d, 1.0)],
            xi: vec![(d, 1.0)],
            parity_coupling: true,
            fading,
        }
    }
}

/// Final state of the EC-LDGM recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct EcLdgmState {
    /// Mean check-to-systematic message, averaged over users.
    pub mu_us_bar: f64,
    /// Check-to-parity means, one per user (one value under IID fading).
    pub mu_up: Vec<f64>,
    pub p_e: f64,
}

pub fn de_ec_ldgm(params: &EcLdgmParams, mu_u0: &[f64], iters: usize, kind: PsiKind) -> Result<EcLdgmState> {
    if params.check_degree == 0 {
        return Err(Error::InvalidParameter("check degree must be at least 1".into()));
    }
    if mu_u0.is_empty() || mu_u0.iter().any(|&m| m.is_nan() || m < 0.0) {
        return Err(Error::InvalidParameter("need non-negative channel means".into()));
    }
    let m = mu_u0.len();
    let users = match params.fading {
        FadingModel::Block => m,
        FadingModel::Iid => 1,
    };
    let ks = params.check_degree as f64;
    let mut mu_us = vec![0.0; users];
    let mut mu_up = vec![0.0; users];
    let mut bar = 0.0;
    for _ in 0..iters {
        let sys = ln_phi_var_mix(&params.lambda_s, mu_u0, bar, kind);
        let to_sys = ln_phi_power(sys, ks - 1.0);
        let to_par = ln_phi_power(sys, ks);
        for t in 0..users {
            let (mut s_msg, mut p_msg) = (to_sys, to_par);
            if params.parity_coupling {
                let par = match params.fading {
                    FadingModel::Block => ln_phi(mu_u0[t] + mu_up[t], kind),
                    FadingModel::Iid => ln_mix(
                        mu_u0
                            .iter()
                            .map(|&m0| (1.0 / m as f64, ln_phi(m0 + mu_up[t], kind))),
                    ),
                };
                s_msg = ln_phi_product(s_msg, ln_phi_power(par, 2.0));
                p_msg = ln_phi_product(p_msg, par);
            }
            mu_us[t] = check_finite(ln_phi_inv(s_msg, kind), "systematic message mean")?;
            mu_up[t] = check_finite(ln_phi_inv(p_msg, kind), "parity message mean")?;
        }
        bar = mu_us.iter().sum::<f64>() / users as f64;
    }
    let profile = DegreeProfile {
        lambda: params.lambda_s.clone(),
        rho: vec![(params.check_degree, 1.0)],
        xi: params.xi.clone(),
    };
    Ok(EcLdgmState {
        mu_us_bar: bar,
        mu_up,
        p_e: error_prob(&profile, bar, mu_u0),
    })
}

/// Channel LLR mean `4 |a|^2 / N0` for a fading power gain and SNR in dB.
pub fn channel_mean(gain: f64, snr_db: f64) -> f64 {
    4.0 * gain * 10f64.powf(snr_db / 10.0)
}

/// Mean of `eval` over `n_samples` independent block-fading rounds of `m` users.
///
/// Sample `k` draws its gains from a stream derived from `(seed, k)`, so
/// results do not depend on the SNR or on the thread count.
pub fn fading_average<F>(eval: F, snr_db: f64, m: usize, n_samples: usize, seed: u64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if n_samples == 0 {
        return Err(Error::InvalidParameter("fading average needs at least one sample".into()));
    }
    let values: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[k as u64]));
            let mu: Vec<f64> = (0..m)
                .map(|_| {
                    let g: f64 = Exp1.sample(&mut rng);
                    channel_mean(g, snr_db)
                })
                .collect();
            eval(&mu)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(values.iter().sum::<f64>() / n_samples as f64)
}

/// Midpoint quantiles of the unit-mean exponential power gain.
pub fn iid_fade_points(k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| -(-(i as f64 + 0.5) / k as f64).ln_1p())
        .collect()
}

/// Ensemble-level predictor used by the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeModel {
    pub ensemble: Ensemble,
    pub degree: usize,
    pub iters: usize,
    pub kind: PsiKind,
}

/// Fade points used to represent IID Rayleigh fading.
pub const IID_POINTS: usize = 128;

impl DeModel {
    /// Error probability for one set of per-channel means.
    pub fn p_e_star(&self, mu_u0: &[f64], fading: FadingModel) -> Result<f64> {
        match self.ensemble {
            Ensemble::EcLdgm => {
                let p = EcLdgmParams::regular(self.degree, fading);
                Ok(de_ec_ldgm(&p, mu_u0, self.iters, self.kind)?.p_e)
            }
            e => pe_general(&degree_profile(e, self.degree)?, mu_u0, self.iters, self.kind),
        }
    }

    /// Predicted bit error rate at `snr_db`.
    pub fn predict(&self, snr_db: f64, fading: FadingModel, m: usize, samples: usize, seed: u64) -> Result<f64> {
        match fading {
            FadingModel::Block => {
                fading_average(|mu| self.p_e_star(mu, FadingModel::Block), snr_db, m, samples, seed)
            }
            FadingModel::Iid => {
                let mu: Vec<f64> = iid_fade_points(IID_POINTS)
                    .into_iter()
                    .map(|g| channel_mean(g, snr_db))
                    .collect();
                self.p_e_star(&mu, FadingModel::Iid)
            }
        }
    }
}

/// Largest noise standard deviation for which the single-channel recursion
/// drives the message mean to the cap within `iters` iterations.
pub fn threshold_sigma(profile: &DegreeProfile, iters: usize, kind: PsiKind) -> Result<f64> {
    let decodes = |sigma: f64| -> Result<bool> {
        let t = de_general(profile, &[2.0 / (sigma * sigma)], iters, kind)?;
        Ok(*t.last().expect("non-empty") >= MU_CAP)
    };
    let (mut lo, mut hi) = (0.1, 3.0);
    if !decodes(lo)? {
        return Ok(0.0);
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if decodes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
