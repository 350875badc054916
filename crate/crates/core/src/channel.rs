//! BPSK over Rayleigh fading with coherent LLR demapping.
//!
//! The received sample is `y = a x + z` with `a` complex Gaussian of unit
//! power and `z` complex Gaussian with variance `N0` (half per dimension).
//! Matched filtering gives the real channel `Re(a* y) = |a|^2 x + n` whose
//! LLR is `4 Re(a* y) / N0`, Gaussian with mean `4|a|^2/N0` and twice that
//! variance when `x = +1`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingModel {
    /// One coefficient per user per round.
    Block,
    /// One coefficient per transmitted bit.
    Iid,
}

impl std::str::FromStr for FadingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "block" => Ok(FadingModel::Block),
            "iid" => Ok(FadingModel::Iid),
            other => Err(Error::Config(format!("unknown fading model '{other}'"))),
        }
    }
}

impl std::fmt::Display for FadingModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FadingModel::Block => "block",
            FadingModel::Iid => "iid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub model: FadingModel,
    pub alpha: Vec<Complex64>,
    pub n0: f64,
}

impl ChannelRealization {
    /// Coefficient seen by bit `k` of a frame made of `m` users' packets of
    /// `packet_len` bits each, laid out user by user.
    pub fn alpha_for(&self, k: usize, packet_len: usize) -> Complex64 {
        match self.model {
            FadingModel::Block => self.alpha[(k / packet_len) % self.alpha.len()],
            FadingModel::Iid => self.alpha[k],
        }
    }
}

/// `N0` for a per-bit SNR in dB with unit average fading power.
pub fn n0_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn bpsk_modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter()
        .map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Unit-power circularly symmetric complex Gaussian.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws `m` coefficients (block) or `frame_len` (IID).
pub fn sample_fading<R: Rng + ?Sized>(
    model: FadingModel,
    m: usize,
    frame_len: usize,
    n0: f64,
    rng: &mut R,
) -> ChannelRealization {
    let count = match model {
        FadingModel::Block => m,
        FadingModel::Iid => frame_len,
    };
    ChannelRealization {
        model,
        alpha: (0..count).map(|_| complex_gaussian(rng)).collect(),
        n0,
    }
}

/// `y_k = a_k x_k + z_k`. `alpha` holds one coefficient per symbol.
///
/// Noise is drawn at unit power and scaled by `sqrt(N0)`, so the same stream
/// gives the same normalised noise at every SNR.
pub fn apply_channel<R: Rng + ?Sized>(
    symbols: &[f64],
    alpha: &[Complex64],
    n0: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if symbols.len() != alpha.len() {
        return Err(Error::Dimension(format!(
            "{} symbols but {} fading coefficients",
            symbols.len(),
            alpha.len()
        )));
    }
    let s = n0.max(0.0).sqrt();
    Ok(symbols
        .iter()
        .zip(alpha)
        .map(|(&x, &a)| a * x + complex_gaussian(rng) * s)
        .collect())
}

/// `LLR_k = 4 Re(a_k* y_k) / N0`, positive when bit 0 is more likely.
pub fn llr_demap(y: &[Complex64], alpha: &[Complex64], n0: f64) -> Result<Vec<f64>> {
    if n0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("N0 must be positive, got {n0}")));
    }
    if y.len() != alpha.len() {
        return Err(Error::Dimension(format!(
            "{} samples but {} fading coefficients",
            y.len(),
            alpha.len()
        )));
    }
    Ok(y.iter()
        .zip(alpha)
        .map(|(y, a)| 4.0 * (a.conj() * y).re / n0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn modulation() {
        assert_eq!(bpsk_modulate(&[0, 1, 0]), vec![1.0, -1.0, 1.0]);
        assert!(bpsk_modulate(&[]).is_empty());
        assert!(bpsk_modulate(&[1; 4]).iter().all(|&s| s == -1.0));
    }

    #[test]
    fn coefficient_counts() {
        let mut rng = rng_from(1);
        assert_eq!(sample_fading(FadingModel::Block, 5, 100, 1.0, &mut rng).alpha.len(), 5);
        assert_eq!(sample_fading(FadingModel::Iid, 5, 100, 1.0, &mut rng).alpha.len(), 100);
    }

    #[test]
    fn unit_average_power() {
        let mut rng = rng_from(2);
        let n = 100_000;
        let mean = (0..n).map(|_| complex_gaussian(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |a|^2 = {mean}");
    }

    #[test]
    fn noiseless_and_faded_out_channels() {
        let mut rng = rng_from(3);
        let a = vec![Complex64::new(0.3, -0.4); 3];
        let y = apply_channel(&[1.0, -1.0, 1.0], &a, 0.0, &mut rng).unwrap();
        assert_eq!(y[1], -a[1]);
        let zero = vec![Complex64::new(0.0, 0.0); 3];
        let llr = llr_demap(&[Complex64::new(0.7, 0.1); 3], &zero, 1.0).unwrap();
        assert!(llr.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn llr_examples() {
        let one = [Complex64::new(1.0, 0.0)];
        assert_eq!(llr_demap(&[Complex64::new(1.0, 0.0)], &one, 2.0).unwrap(), vec![2.0]);
        assert_eq!(llr_demap(&[Complex64::new(-0.5, 0.0)], &one, 2.0).unwrap(), vec![-1.0]);
        assert!(llr_demap(&[Complex64::new(1.0, 0.0)], &one, 0.0).is_err());
    }

    #[test]
    fn empirical_snr() {
        let mut rng = rng_from(4);
        let n = 100_000;
        let n0 = 0.5;
        let real = sample_fading(FadingModel::Iid, 1, n, n0, &mut rng);
        let y = apply_channel(&vec![1.0; n], &real.alpha, n0, &mut rng).unwrap();
        let noise: f64 = y.iter().zip(&real.alpha).map(|(y, a)| (y - a).norm_sqr()).sum::<f64>() / n as f64;
        let signal: f64 = real.alpha.iter().map(|a| a.norm_sqr()).sum::<f64>() / n as f64;
        assert!((signal / noise - 1.0 / n0).abs() < 0.05 / n0);
    }

    #[test]
    fn llr_consistency_condition() {
        let mut rng = rng_from(5);
        let n = 100_000;
        let n0 = 0.8;
        let a = vec![Complex64::new(0.6, 0.5); n];
        let y = apply_channel(&vec![1.0; n], &a, n0, &mut rng).unwrap();
        let llr = llr_demap(&y, &a, n0).unwrap();
        let mean = llr.iter().sum::<f64>() / n as f64;
        let var = llr.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 4.0 * a[0].norm_sqr() / n0).abs() / mean < 0.02);
        assert!((var / (2.0 * mean) - 1.0).abs() < 0.05);
    }
}
