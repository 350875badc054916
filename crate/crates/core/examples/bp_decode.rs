//! Sum-product decoding of a (3,6)-regular LDPC code on an AWGN channel.

use gancc::codes::ChannelCodeSpec;
use gancc::decoder::BpDecoder;
use gancc::gf2::generate_regular_ldpc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> gancc::Result<()> {
    let h = generate_regular_ldpc(1008, 3, 6, 11)?;
    let code = ChannelCodeSpec::from_parity_check(h.clone());
    let mut dec = BpDecoder::new(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rate = code.k() as f64 / code.n() as f64;
    println!("n = {}, k = {}, rate {rate:.3}", code.n(), code.k());

    for ebn0_db in [1.0, 1.5, 2.0, 2.5] {
        let ebn0 = 10f64.powf(ebn0_db / 10.0);
        let sigma = (1.0 / (2.0 * rate * ebn0)).sqrt();
        let noise = Normal::new(0.0, sigma).expect("positive sigma");
        let (mut frame_errors, mut bit_errors, mut iters) = (0, 0, 0);
        let frames = 200;
        for _ in 0..frames {
            let info: Vec<u8> = (0..code.k()).map(|_| rng.random::<bool>() as u8).collect();
            let word = code.encode(&info)?;
            let llr: Vec<f64> = word
                .iter()
                .map(|&b| {
                    let y = if b == 0 { 1.0 } else { -1.0 } + noise.sample(&mut rng);
                    2.0 * y / (sigma * sigma)
                })
                .collect();
            let res = dec.decode(&llr, 50)?;
            let errs = code.extract_info(&res.hard).iter().zip(&info).filter(|(a, b)| a != b).count();
            bit_errors += errs;
            frame_errors += usize::from(errs > 0);
            iters += res.iterations;
        }
        println!(
            "Eb/N0 {ebn0_db:.1} dB: ber {:.2e}, fer {:.3}, mean iterations {:.1}",
            bit_errors as f64 / (frames * code.k()) as f64,
            frame_errors as f64 / frames as f64,
            iters as f64 / frames as f64
        );
    }
    Ok(())
}
