//! BER/PER sweep of circulant lifting against the identity (ANCC) baseline,
//! written as CSV under `GANCC_OUT_DIR` (default: current directory).

use gancc::harness::{default_out_dir, run_sweep, snr_at_level, write_csv, Lifting, SimConfig};

fn main() -> gancc::Result<()> {
    let mut text = String::new();
    let mut crossings = Vec::new();
    for (name, lifting) in [("gancc", Lifting::Circulant), ("ancc", Lifting::Identity)] {
        let cfg = SimConfig {
            scheme: name.into(),
            lifting,
            m: 5,
            packet_len: 500,
            snr_db: (0..=8).map(|k| 2.0 * k as f64).collect(),
            trials: 60,
            seed: Some(1),
            ..SimConfig::default()
        };
        let res = run_sweep(&cfg)?;
        text.push_str(&res.to_csv(text.is_empty()));
        crossings.push((name, snr_at_level(&res.ber_curve(), 1e-2)));
    }
    print!("{text}");
    for (name, x) in crossings {
        match x {
            Some(x) => println!("{name}: BER 1e-2 at {x:.2} dB"),
            None => println!("{name}: BER 1e-2 not crossed on this grid"),
        }
    }
    let path = default_out_dir().join("ber_sweep.csv");
    write_csv(&path, &text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
