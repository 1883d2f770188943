use std::collections::BTreeMap;

use agora_analytics::{cohen_kappa, embedding_distance, levenshtein_words, minmax_scale, weighted_irr, ConfusionMatrix};
use agora_core::gateways::mock::MockEmbedder;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Textbook full-matrix edit distance with its own tokenizer.
fn oracle(a: &str, b: &str) -> usize {
    let tok = |s: &str| -> Vec<String> {
        s.split_whitespace()
            .map(|w| w.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect()
    };
    let (a, b) = (tok(a), tok(b));
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

const VOCAB: &[&str] = &["The", "signing", "of", "a", "declaration", "Hall,", "women", "men.", "quill", "wig", "crowd!", "Haiti"];

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(0..12);
    (0..n).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" ")
}

#[test]
fn levenshtein_matches_dp_oracle_on_200_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let (a, b) = (sentence(&mut rng), sentence(&mut rng));
        assert_eq!(levenshtein_words(&a, &b), oracle(&a, &b), "{a:?} vs {b:?}");
    }
}

#[test]
fn kappa_on_fixed_matrices() {
    assert_eq!(cohen_kappa(&ConfusionMatrix::new(10, 0, 0, 10)).unwrap(), 1.0);
    assert_eq!(cohen_kappa(&ConfusionMatrix::new(5, 5, 5, 5)).unwrap(), 0.0);
    // p_o = 60/100, p_a = 60/100, p_b = 70/100, p_e = 0.42 + 0.12 = 0.54,
    // kappa = 0.06 / 0.46 = 3/23
    let k = cohen_kappa(&ConfusionMatrix::new(45, 15, 25, 15)).unwrap();
    assert!((k - 3.0 / 23.0).abs() < 1e-12, "{k}");
}

fn value_code_kappas() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([("realism", 0.66), ("familiarity", 0.83), ("diversity", 0.60), ("aesthetics", 0.38)])
}

#[test]
fn value_code_kappas_equal_weights_and_reported_value() {
    let k = value_code_kappas();
    let equal: BTreeMap<_, _> = k.keys().map(|c| (*c, 1u64)).collect();
    assert!((weighted_irr(&k, &equal).unwrap() - 0.6175).abs() < 1e-12);
    let single = BTreeMap::from([("aesthetics", 0.38)]);
    assert_eq!(weighted_irr(&single, &BTreeMap::from([("aesthetics", 9)])).unwrap(), 0.38);

    // some small frequency vector reproduces the reported 0.67 at two decimals
    let mut hits = 0;
    for r in 1..=20u64 {
        for f in 1..=20u64 {
            for d in 1..=20u64 {
                for a in 1..=20u64 {
                    let freqs = BTreeMap::from([("realism", r), ("familiarity", f), ("diversity", d), ("aesthetics", a)]);
                    let w = weighted_irr(&k, &freqs).unwrap();
                    assert!((0.38..=0.83).contains(&w));
                    if (w - 0.67).abs() < 0.005 {
                        hits += 1;
                    }
                }
            }
        }
    }
    assert!(hits > 0);
}

proptest! {
    #[test]
    fn levenshtein_is_a_metric(a in "[a-d ]{0,24}", b in "[a-d ]{0,24}", c in "[a-d ]{0,24}") {
        let d = levenshtein_words;
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert_eq!(d(&a, &a), 0);
    }

    #[test]
    fn kappa_symmetry_and_perfection(both in 0u64..40, ao in 0u64..40, bo in 0u64..40, neither in 0u64..40) {
        let m = ConfusionMatrix::new(both, ao, bo, neither);
        prop_assume!(m.total() > 0);
        let k = cohen_kappa(&m).unwrap();
        prop_assert_eq!(k, cohen_kappa(&m.transposed()).unwrap());
        prop_assert!((-1.0..=1.0).contains(&k));
        prop_assert_eq!(k == 1.0, ao == 0 && bo == 0);
    }

    #[test]
    fn weighted_irr_is_convex(freqs in proptest::collection::vec(1u64..500, 4)) {
        let k = value_code_kappas();
        let f: BTreeMap<_, _> = k.keys().copied().zip(freqs).collect();
        let w = weighted_irr(&k, &f).unwrap();
        prop_assert!((0.38 - 1e-12..=0.83 + 1e-12).contains(&w));
    }

    #[test]
    fn scaling_is_affine_invariant(xs in proptest::collection::vec(-50.0f64..50.0, 2..8), factor in 0.01f64..100.0, shift in -10.0f64..10.0) {
        let m: BTreeMap<usize, f64> = xs.iter().copied().enumerate().collect();
        let t: BTreeMap<usize, f64> = xs.iter().map(|x| x * factor + shift).enumerate().collect();
        let (a, b) = (minmax_scale(&m).unwrap(), minmax_scale(&t).unwrap());
        for (k, v) in &a.values {
            prop_assert!((0.0..=1.0).contains(v));
            prop_assert!((v - b.values[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn embedding_distance_is_symmetric(a in "[a-f]{1,6}( [a-f]{1,6}){0,5}", b in "[a-f]{1,6}( [a-f]{1,6}){0,5}") {
        let e = MockEmbedder::default();
        let ab = embedding_distance(&e, &a, &b).unwrap();
        prop_assert!((ab - embedding_distance(&e, &b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=2.0).contains(&ab));
    }
}
