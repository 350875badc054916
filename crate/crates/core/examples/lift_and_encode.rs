//! Lifts one base matrix into the three ensembles, encodes random packets and
//! checks the resulting codewords.

use gancc::codes::{encode_network, girth, lift, BaseMatrix, Ensemble, OffsetTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gancc::Result<()> {
    let m = 4;
    let n = 31;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sources: Vec<Vec<u8>> = (0..m)
        .map(|_| (0..n).map(|_| rng.random::<bool>() as u8).collect())
        .collect();

    // Relay r checks sources r and r+1; in LT form it also references relay r-1.
    let ldgm_rows: Vec<Vec<usize>> = (0..m).map(|r| vec![r, (r + 1) % m]).collect();
    let lt_rows: Vec<Vec<usize>> = (0..m)
        .map(|r| {
            let mut row = vec![r, (r + 1) % m];
            if r > 0 {
                row.push(m + r - 1);
            }
            row
        })
        .collect();

    for ensemble in [Ensemble::Ldgm, Ensemble::LtLdpc, Ensemble::EcLdgm] {
        let rows = if ensemble == Ensemble::LtLdpc { &lt_rows } else { &ldgm_rows };
        let base = BaseMatrix::from_rows(m, rows.clone())?;
        let h = lift(&base, n, ensemble, &OffsetTable::product_scheme(&base, n))?;
        let relays = encode_network(&h, &sources)?;
        let word: Vec<u8> = sources.iter().chain(&relays).flatten().copied().collect();
        println!(
            "{ensemble:>8}: {}x{} matrix, {} ones, girth {}, zero syndrome {}",
            h.n_rows(),
            h.n_cols(),
            h.matrix().nnz(),
            girth(h.matrix()),
            h.syndrome_is_zero(&word)?
        );
    }
    Ok(())
}
