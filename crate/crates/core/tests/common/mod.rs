#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use toric_deform::*;

pub fn eq0(n: u32) -> DvrSpec {
    DvrSpec::equal_char_zero(n).unwrap()
}

pub fn eqp(p: u64, n: u32) -> DvrSpec {
    DvrSpec::equal_char_p(p, n).unwrap()
}

pub fn mixed(p: u64, n: u32) -> DvrSpec {
    DvrSpec::mixed_char(p, n).unwrap()
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Random element of the base ring. Equal-char-0 denominators avoid 5, 7, 11.
pub fn scalar(spec: DvrSpec) -> BoxedStrategy<Scalar> {
    let len = spec.n() as usize + 1;
    match spec.kind() {
        DvrKind::EqualCharZero => prop::collection::vec((-20i64..=20, prop::sample::select(vec![1i64, 2, 3, 4, 6])), len)
            .prop_map(move |c| {
                c.iter().enumerate().fold(Scalar::zero(spec), |acc, (k, &(a, b))| {
                    &acc + &Scalar::term(spec, &rat(a, b), k as u32).unwrap()
                })
            })
            .boxed(),
        DvrKind::EqualCharP => prop::collection::vec(0..spec.p() as i64, len)
            .prop_map(move |c| {
                c.iter().enumerate().fold(Scalar::zero(spec), |acc, (k, &a)| {
                    &acc + &Scalar::term(spec, &rat(a, 1), k as u32).unwrap()
                })
            })
            .boxed(),
        DvrKind::MixedChar => (0..spec.modulus() as i64).prop_map(move |v| Scalar::from_i64(spec, v)).boxed(),
    }
}

pub fn unit(spec: DvrSpec) -> BoxedStrategy<Scalar> {
    scalar(spec).prop_filter("unit", |s| s.is_unit()).boxed()
}

/// Sparse polynomial in `e` variables with at most `terms` terms of degree at most `deg` per variable.
pub fn series(ring: SeriesRing, terms: usize, deg: u32) -> BoxedStrategy<Series> {
    let e = ring.e();
    let spec = ring.spec();
    prop::collection::vec((prop::collection::vec(0..=deg, e), scalar(spec)), 0..=terms)
        .prop_map(move |ts| {
            let mut s = ring.zero();
            for (exps, c) in ts {
                s.add_term(XMonomial::from_exps(exps), c).unwrap();
            }
            s
        })
        .boxed()
}

pub fn chain(a: &[u32]) -> Chain {
    Chain::reduced(a.to_vec()).unwrap()
}

pub fn ring(c: &Chain, spec: DvrSpec) -> SeriesRing {
    SeriesRing::new(c.e(), spec, c.default_cap())
}

/// Consecutive perturbations from `(index, literal)` pairs.
pub fn consecutive(r: &SeriesRing, h: &[(usize, &str)]) -> BTreeMap<usize, Series> {
    h.iter().map(|&(i, s)| (i, r.parse(s).unwrap())).collect()
}

/// Every reduced chain with entries in `lo..=hi` and `1..=max_len` entries.
pub fn all_chains(lo: u32, hi: u32, max_len: usize) -> Vec<Chain> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|c| (lo..=hi).map(move |a| [c.as_slice(), &[a]].concat()))
            .collect();
        out.extend(layer.iter().map(|c| Chain::new(c.clone())));
    }
    out
}

/// Chains used where a property is checked per chain.
pub const TEST_CHAINS: &[&[u32]] = &[&[2], &[3], &[4], &[2, 2], &[3, 2], &[2, 4], &[2, 2, 2], &[3, 2, 3]];

/// Proptest settings without regression files, which integration tests cannot locate.
pub fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}
