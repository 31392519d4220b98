mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toric_deform::chain::reduce_chain_with;
use toric_deform::*;

#[test]
fn expansion_inverts_value_exhaustively() {
    for c in all_chains(2, 6, 6) {
        let (n, q) = hj_value(&c).unwrap();
        assert!(n > q && q >= 1, "{c}: {n}/{q}");
        assert_eq!(hj_expand(n, q).unwrap(), c);
    }
}

#[test]
fn value_inverts_expansion() {
    for n in 2..=200u64 {
        for q in 1..n {
            if num_integer::gcd(n, q) == 1 {
                assert_eq!(hj_value(&hj_expand(n, q).unwrap()).unwrap(), (n, q));
            }
        }
    }
}

#[test]
fn expansion_examples() {
    assert_eq!(hj_expand(5, 2).unwrap().entries(), &[3, 2]);
    assert_eq!(hj_value(&chain(&[2])).unwrap(), (2, 1));
    assert_eq!(hj_value(&Chain::new(vec![])).unwrap().0, 1);
    assert!(hj_expand(4, 2).is_err());
    assert!(hj_expand(3, 3).is_err());
}

#[test]
fn syzygies_hold_on_sampled_chains() {
    let mut all = all_chains(2, 5, 5);
    all.shuffle(&mut ChaCha8Rng::seed_from_u64(11));
    for c in all.iter().take(220) {
        let r = ring(c, eq0(1));
        let report = c.verify_syzygies(&r).unwrap();
        assert!(report.passed(), "{c}: {:?}", report.failure);
    }
}

/// Every sequence of entries in `lo..=hi` with at most `max_len` entries.
fn sequences(lo: i64, hi: i64, max_len: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|c| (lo..=hi).map(move |a| [c.as_slice(), &[a]].concat())).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[test]
fn reduction_is_confluent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seq in sequences(0, 4, 5) {
        let canonical = reduce_chain(&seq);
        for _ in 0..4 {
            let other = reduce_chain_with(&seq, |ones| *ones.choose(&mut rng).unwrap());
            assert_eq!(other, canonical, "{seq:?}");
        }
        let last = reduce_chain_with(&seq, |ones| ones[ones.len() - 1]);
        assert_eq!(last, canonical, "{seq:?}");
    }
}

#[test]
fn reduction_examples() {
    assert_eq!(reduce_chain(&[1]), Reduced::Smooth);
    assert_eq!(reduce_chain(&[2, 1, 2]), Reduced::Smooth);
    assert_eq!(reduce_chain(&[3, 1, 3]), Reduced::Singular(chain(&[2, 2])));
    assert_eq!(reduce_chain(&[2, 2]), Reduced::Singular(chain(&[2, 2])));
}
