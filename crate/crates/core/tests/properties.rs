use gancc::alist::{read_alist, to_alist_string};
use gancc::codes::{
    differential_decode, differential_encode, embed_channel_codes, encode_network, girth, girth6_condition, lift,
    BaseMatrix, ChannelCodeSpec, Ensemble, OffsetTable,
};
use gancc::construction::{header_decode, header_encode, reconstruct_base, BitmapHeader};
use gancc::de::{psi, psi_inv, PsiKind};
use gancc::decoder::{decode_with, sum_product, DecodeStrategy, IterBudget};
use gancc::gf2::generate_regular_ldpc;
use gancc::harness::parse_snr_list;
use gancc::SparseBinMatrix;
use proptest::prelude::*;

/// Lower-triangular base rows: sources freely, earlier relays optionally.
fn base_strategy() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (2usize..=5).prop_flat_map(|m| {
        let rows = (0..m)
            .map(|r| {
                (
                    prop::collection::vec(any::<bool>(), m),
                    prop::collection::vec(any::<bool>(), r),
                )
                    .prop_map(move |(src, rel)| {
                        let mut row: Vec<usize> = (0..m).filter(|&c| src[c]).collect();
                        row.extend((0..r).filter(|&j| rel[j]).map(|j| m + j));
                        row
                    })
            })
            .collect::<Vec<_>>();
        (Just(m), rows)
    })
}

fn bits(n: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, n)
}

fn four_cycle_free(h: &SparseBinMatrix) -> bool {
    (0..h.n_rows()).all(|r| {
        (r + 1..h.n_rows()).all(|s| h.row(r).iter().filter(|c| h.row(s).binary_search(c).is_ok()).count() < 2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn girth_condition_matches_search((m, rows) in base_strategy(), n in 1usize..24, seed in any::<u64>()) {
        use rand::SeedableRng;
        let base = BaseMatrix::from_rows(m, rows).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let offsets = OffsetTable::random(&base, n, &mut rng);
        let h = lift(&base, n, Ensemble::LtLdpc, &offsets).unwrap();
        let predicted = girth6_condition(&base, &offsets, n).unwrap();
        prop_assert_eq!(predicted, four_cycle_free(h.matrix()));
        prop_assert_eq!(predicted, girth(h.matrix()).at_least(6));
    }

    #[test]
    fn differential_round_trip(x in prop::collection::vec(0u8..=1, 1..200)) {
        prop_assert_eq!(differential_decode(&differential_encode(&x).unwrap()).unwrap(), x.clone());
        prop_assert_eq!(differential_encode(&differential_decode(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn network_codewords_satisfy_checks(
        (m, rows) in base_strategy(),
        n in 1usize..40,
        data in prop::collection::vec(any::<u8>(), 5 * 40),
        ens_pick in 0usize..3,
    ) {
        let ensemble = [Ensemble::Ldgm, Ensemble::LtLdpc, Ensemble::EcLdgm][ens_pick];
        let rows = if ensemble == Ensemble::LtLdpc {
            rows
        } else {
            rows.into_iter().map(|r| r.into_iter().filter(|&c| c < m).collect()).collect()
        };
        let base = BaseMatrix::from_rows(m, rows).unwrap();
        let h = lift(&base, n, ensemble, &OffsetTable::product_scheme(&base, n)).unwrap();
        let sources: Vec<Vec<u8>> = (0..m).map(|u| (0..n).map(|k| data[u * 40 + k] & 1).collect()).collect();
        let relays = encode_network(&h, &sources).unwrap();
        let word: Vec<u8> = sources.iter().chain(&relays).flatten().copied().collect();
        prop_assert!(h.syndrome_is_zero(&word).unwrap());
    }

    #[test]
    fn headers_round_trip(m in 1usize..=64, picks in prop::collection::vec(any::<u8>(), 0..20)) {
        let mut sel: Vec<usize> = picks.iter().map(|&p| p as usize % (2 * m)).collect();
        sel.sort_unstable();
        sel.dedup();
        let h = header_encode(&sel, m).unwrap();
        prop_assert_eq!(header_decode(h, m).unwrap(), sel);
    }

    #[test]
    fn headers_rebuild_base((m, rows) in base_strategy()) {
        let base = BaseMatrix::from_rows(m, rows.clone()).unwrap();
        let headers: Vec<BitmapHeader> = rows.iter().map(|r| header_encode(r, m).unwrap()).collect();
        prop_assert_eq!(reconstruct_base(&headers, m).unwrap(), base);
    }

    #[test]
    fn alist_round_trip(n_cols in 1usize..30, rows in prop::collection::vec(prop::collection::btree_set(0usize..30, 0..6), 1..12)) {
        let rows: Vec<Vec<usize>> = rows.into_iter().map(|r| r.into_iter().filter(|&c| c < n_cols).collect()).collect();
        let h = SparseBinMatrix::from_rows(n_cols, rows).unwrap();
        prop_assert_eq!(read_alist(to_alist_string(&h).as_bytes()).unwrap(), h);
    }

    #[test]
    fn psi_inverse_round_trip(mu in 1e-3f64..60.0) {
        let y = psi(mu, PsiKind::Exact);
        let back = psi_inv(y, PsiKind::Exact).unwrap();
        prop_assert!((back - mu).abs() <= 1e-6 * mu.max(1.0), "mu {} back {}", mu, back);
    }

    #[test]
    fn confident_llrs_decode_to_the_codeword(word_bits in bits(12), scale in 3.0f64..20.0) {
        // Repetition-style code: every adjacent pair equal.
        let n = 12;
        let h = SparseBinMatrix::from_rows(n, (0..n - 1).map(|i| vec![i, i + 1]).collect()).unwrap();
        let cw = vec![word_bits[0]; n];
        let llr: Vec<f64> = cw.iter().map(|&b| if b == 0 { scale } else { -scale }).collect();
        let res = sum_product(&h, &llr, 20).unwrap();
        prop_assert_eq!(res.hard, cw);
        prop_assert!(res.posterior.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn snr_ranges_are_inclusive(start in -10i32..10, steps in 0usize..20) {
        let stop = start as f64 + steps as f64 * 0.5;
        let v = parse_snr_list(&format!("{start}:0.5:{stop}")).unwrap();
        prop_assert_eq!(v.len(), steps + 1);
        prop_assert!((v[steps] - stop).abs() < 1e-9);
    }
}

#[test]
fn embedded_channel_codes_add_rows_and_keep_codewords() {
    let m = 3;
    let n = 24;
    let base = BaseMatrix::from_rows(m, vec![vec![0, 1], vec![1, 2, 3], vec![0, 2, 4]]).unwrap();
    let net = lift(&base, n, Ensemble::LtLdpc, &OffsetTable::product_scheme(&base, n)).unwrap();
    let specs: Vec<ChannelCodeSpec> = (0..m)
        .map(|u| ChannelCodeSpec::from_parity_check(generate_regular_ldpc(n, 3, 6, u as u64).unwrap()))
        .collect();
    let unified = embed_channel_codes(&net, &specs).unwrap();
    let extra: usize = specs.iter().map(|s| s.check_rows()).sum();
    assert_eq!(unified.n_rows(), net.n_rows() + extra);
    assert_eq!(unified.n_cols(), net.n_cols());

    let sources: Vec<Vec<u8>> = specs
        .iter()
        .enumerate()
        .map(|(u, s)| s.encode(&(0..s.k()).map(|k| ((k * 7 + u) % 3 == 0) as u8).collect::<Vec<_>>()).unwrap())
        .collect();
    let relays = encode_network(&net, &sources).unwrap();
    let word: Vec<u8> = sources.iter().chain(&relays).flatten().copied().collect();
    assert!(unified.syndrome_is_zero(&word).unwrap());

    // Noise-free LLRs decode to the same word with every strategy.
    let llr: Vec<f64> = word.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect();
    for s in [DecodeStrategy::Joint, DecodeStrategy::Sequential, DecodeStrategy::IterativeGlobal(3)] {
        let res = decode_with(s, &net, &unified, &specs, &llr, IterBudget::uniform(20)).unwrap();
        assert_eq!(res.hard, word, "{s}");
    }
}
