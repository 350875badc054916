//! BPSK over block and IID Rayleigh fading: empirical bit error rate of
//! uncoded hard decisions against the closed form, and the LLR mean/variance.

use gancc::channel::{apply_channel, bpsk_modulate, llr_demap, n0_from_snr_db, sample_fading, FadingModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gancc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bits: Vec<u8> = (0..200_000).map(|_| rng.random::<bool>() as u8).collect();
    let x = bpsk_modulate(&bits);

    for snr_db in [0.0, 5.0, 10.0, 15.0] {
        let n0 = n0_from_snr_db(snr_db);
        let fades = sample_fading(FadingModel::Iid, 1, bits.len(), n0, &mut rng);
        let alpha: Vec<_> = (0..bits.len()).map(|k| fades.alpha_for(k, bits.len())).collect();
        let y = apply_channel(&x, &alpha, n0, &mut rng)?;
        let llr = llr_demap(&y, &alpha, n0)?;
        let errors = llr.iter().zip(&bits).filter(|(&l, &b)| u8::from(l < 0.0) != b).count();
        let snr = 1.0 / n0;
        let theory = 0.5 * (1.0 - (snr / (1.0 + snr)).sqrt());
        println!(
            "{snr_db:>5} dB  ber {:.3e}  theory {theory:.3e}",
            errors as f64 / bits.len() as f64
        );
    }

    // Conditioned on a fixed fade, LLRs of zero bits are Gaussian with variance twice the mean.
    let n0 = n0_from_snr_db(3.0);
    let block = sample_fading(FadingModel::Block, 1, 50_000, n0, &mut rng);
    let alpha = vec![block.alpha[0]; 50_000];
    let zeros = vec![1.0; 50_000];
    let llr = llr_demap(&apply_channel(&zeros, &alpha, n0, &mut rng)?, &alpha, n0)?;
    let mean = llr.iter().sum::<f64>() / llr.len() as f64;
    let var = llr.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / llr.len() as f64;
    println!("block fade |a|^2 = {:.3}: LLR mean {mean:.3}, variance {var:.3}", block.alpha[0].norm_sqr());
    Ok(())
}
