mod common;

use common::*;
use proptest::prelude::*;
use toric_deform::*;

fn rings() -> Vec<SeriesRing> {
    vec![
        SeriesRing::new(3, eq0(3), 40),
        SeriesRing::new(4, eqp(3, 3), 40),
        SeriesRing::new(3, mixed(5, 3), 40),
    ]
}

#[test]
fn substitution_inverts() {
    for r in rings() {
        let shifts = series(r.clone(), 3, 2).prop_map(|s| s.mul_t_pow(1));
        proptest!(cfg(200), |(shift in shifts, l in 1usize..=r.e())| {
            let x = r.var(l);
            let inv = Series::invert_substitution(l, &shift).unwrap();
            let forward = x.add(&shift).unwrap();
            prop_assert_eq!(forward.substitute(l, &inv).unwrap(), x.clone());
            prop_assert_eq!(inv.substitute(l, &forward).unwrap(), x);
        });
    }
}

#[test]
fn substitution_example() {
    let r = SeriesRing::new(3, eq0(2), 10);
    let inv = Series::invert_substitution(3, &r.parse("t*x3").unwrap()).unwrap();
    assert_eq!(inv, r.parse("x3 - t*x3 + t^2*x3").unwrap());
}

#[test]
fn evaluation_is_multiplicative() {
    // t-degrees stay low so products never reach t^{N+1}
    let cases = [
        (SeriesRing::new(3, eq0(4), 40), FieldSpec::prime(7)),
        (SeriesRing::new(3, eqp(5, 4), 40), FieldSpec::Finite { p: 5, m: 2 }),
        (SeriesRing::new(3, eq0(4), 40), FieldSpec::Rationals),
    ];
    for (r, q) in cases {
        let f = Field::new(q).unwrap();
        let low = series(r.clone(), 4, 2).prop_map(|s| s.truncate_to(2));
        let coords = prop::collection::vec(-3i64..=3, 3);
        proptest!(cfg(200), |(a in low.clone(), b in low, pt in coords, tau in 1i64..=4)| {
            let pt: Vec<_> = pt.iter().map(|&x| f.from_i64(x)).collect();
            let tau = f.from_i64(tau);
            let ev = |s: &Series| s.evaluate(&pt, &f, &tau).unwrap();
            prop_assert_eq!(ev(&a.mul(&b).unwrap()), f.mul(&ev(&a), &ev(&b)));
            prop_assert_eq!(ev(&a.add(&b).unwrap()), f.add(&ev(&a), &ev(&b)));
        });
    }
}

#[test]
fn t_degree_is_superadditive() {
    for r in rings() {
        let n = r.spec().n();
        proptest!(cfg(200), |(a in series(r.clone(), 4, 2), b in series(r.clone(), 4, 2))| {
            let p = a.mul(&b).unwrap();
            prop_assert!(p.min_t_degree() >= (a.min_t_degree() + b.min_t_degree()).min(n + 1));
        });
    }
}

#[test]
fn printing_round_trips() {
    for r in rings() {
        proptest!(cfg(200), |(a in series(r.clone(), 5, 3))| {
            prop_assert_eq!(r.parse(&a.to_string()).unwrap(), a);
        });
    }
}

#[test]
fn degree_cap_is_enforced() {
    let r = SeriesRing::new(2, eq0(1), 4);
    let x = r.var(1);
    assert!(matches!(x.pow(5), Err(Error::DegreeCapExceeded { degree: 5, cap: 4 })));
    assert!(x.pow(4).is_ok());
}

#[test]
fn mixing_truncations_is_rejected() {
    let a = SeriesRing::new(2, eq0(1), 4).var(1);
    let b = SeriesRing::new(2, eq0(2), 4).var(1);
    assert!(a.add(&b).is_err());
}
