//! Density-evolution prediction next to a short simulation of the same
//! ensemble on block fading.

use gancc::harness::{compare_de, SimConfig};

fn main() -> gancc::Result<()> {
    let cfg = SimConfig {
        m: 5,
        packet_len: 1000,
        snr_db: vec![2.0, 4.0, 6.0, 8.0],
        trials: 80,
        de_samples: 500,
        de_iters: 60,
        seed: Some(4),
        ..SimConfig::default()
    };
    let cmp = compare_de(&cfg)?;
    print!("{}", cmp.to_csv());
    if let Some(gap) = cmp.max_gap_db(&[1e-2, 3e-3]) {
        println!("largest horizontal gap: {gap:.2} dB");
    }
    Ok(())
}
