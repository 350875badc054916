//! Checks the 4-cycle condition on circulant offsets against a brute-force
//! girth search, then shows that offsets `i * j` clear it once `N` is a prime
//! above `(m - 1)(2m - 1)`.

use gancc::codes::{girth, girth6_condition, lift, BaseMatrix, Ensemble, OffsetTable};
use gancc::construction::example_selections;
use gancc::construction::assemble_base;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gancc::Result<()> {
    let base = assemble_base(&example_selections(), 5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut agree = 0;
    for n in [5, 7, 8, 11] {
        for _ in 0..25 {
            let offsets = OffsetTable::random(&base, n, &mut rng);
            let predicted = girth6_condition(&base, &offsets, n)?;
            let h = lift(&base, n, Ensemble::LtLdpc, &offsets)?;
            let actual = girth(h.matrix()).at_least(6);
            agree += usize::from(predicted == actual);
        }
    }
    println!("condition agrees with BFS girth on {agree}/100 random offset tables");

    for m in [3usize, 5, 8] {
        let bound = (m - 1) * (2 * m - 1);
        let n = (bound + 1..).find(|&p| is_prime(p)).unwrap();
        let full = BaseMatrix::from_dense(&dense_full(m))?;
        let ok = girth6_condition(&full, &OffsetTable::product_scheme(&full, n), n)?;
        println!("m = {m}: N = {n} > {bound}, offsets i*j free of 4-cycles: {ok}");
    }
    Ok(())
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Every source packet in every check, own parity on the diagonal.
fn dense_full(m: usize) -> Vec<Vec<u8>> {
    (0..m)
        .map(|r| (0..2 * m).map(|c| u8::from(c < m || c == m + r)).collect())
        .collect()
}
