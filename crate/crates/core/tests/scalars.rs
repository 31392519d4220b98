mod common;

use common::*;
use proptest::prelude::*;
use toric_deform::*;

fn kinds() -> Vec<DvrSpec> {
    vec![eq0(3), eqp(3, 3), eqp(7, 2), mixed(5, 3), mixed(2, 5)]
}

fn ring_axioms(spec: DvrSpec) {
    let mut runner = proptest::test_runner::TestRunner::new(cfg(10_000));
    runner
        .run(&(scalar(spec), scalar(spec), scalar(spec)), |(a, b, c)| {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
            Ok(())
        })
        .unwrap();
}

#[test]
fn ring_axioms_equal_char_zero() {
    ring_axioms(eq0(3));
}

#[test]
fn ring_axioms_equal_char_p() {
    ring_axioms(eqp(3, 3));
}

#[test]
fn ring_axioms_mixed_char() {
    ring_axioms(mixed(5, 3));
}

#[test]
fn valuation_is_ultrametric() {
    for spec in kinds() {
        proptest!(cfg(256), |(a in scalar(spec), b in scalar(spec))| {
            let (va, vb) = (a.valuation(), b.valuation());
            let sum = (&a + &b).valuation();
            prop_assert!(sum >= va.min(vb));
            if va != vb {
                prop_assert_eq!(sum, va.min(vb));
            }
            prop_assert_eq!((&a * &b).valuation(), (va + vb).min(spec.n() + 1));
        });
    }
}

#[test]
fn inverting_units() {
    for spec in kinds() {
        let mut runner = proptest::test_runner::TestRunner::new(cfg(1_000));
        runner
            .run(&unit(spec), |u| {
                prop_assert!((&u.invert_unit().unwrap() * &u).is_one());
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn non_units_do_not_invert() {
    for spec in kinds() {
        assert!(Scalar::t(spec).invert_unit().is_err());
        assert!(Scalar::zero(spec).invert_unit().is_err());
    }
}

/// Substituting `t = tau` commutes with the ring operations as long as no
/// product reaches `t^{N+1}`.
#[test]
fn specialization_is_homomorphic_below_the_truncation() {
    let spec = eq0(4);
    let low = || {
        scalar(spec).prop_map(move |s| s.truncate_to(1))
    };
    for q in [FieldSpec::prime(7), FieldSpec::prime(11), FieldSpec::Finite { p: 7, m: 2 }, FieldSpec::Rationals] {
        let f = Field::new(q).unwrap();
        let taus: Vec<_> = [1i64, 2, 3].iter().map(|&t| f.from_i64(t)).collect();
        proptest!(cfg(256), |(a in low(), b in low(), k in 0usize..3)| {
            let tau = &taus[k];
            let sp = |s: &Scalar| s.specialize_t(&f, tau).unwrap();
            prop_assert_eq!(sp(&(&a + &b)), f.add(&sp(&a), &sp(&b)));
            prop_assert_eq!(sp(&(&a * &b)), f.mul(&sp(&a), &sp(&b)));
        });
    }
    let spec = eqp(5, 3);
    let f = Field::new(FieldSpec::Finite { p: 5, m: 2 }).unwrap();
    let tau = f.elem(7);
    proptest!(cfg(256), |(a in scalar(spec).prop_map(|s| s.truncate_to(1)), b in scalar(spec).prop_map(|s| s.truncate_to(1)))| {
        let sp = |s: &Scalar| s.specialize_t(&f, &tau).unwrap();
        prop_assert_eq!(sp(&(&a + &b)), f.add(&sp(&a), &sp(&b)));
        prop_assert_eq!(sp(&(&a * &b)), f.mul(&sp(&a), &sp(&b)));
    });
}

/// Mixed characteristic reads integers through their symmetric lift, which
/// commutes with the ring operations while no wrap-around occurs.
#[test]
fn mixed_specialization_is_homomorphic_on_small_integers() {
    let spec = mixed(5, 3);
    let f = Field::new(FieldSpec::prime(11)).unwrap();
    let one = f.one();
    proptest!(cfg(256), |(a in -17i64..=17, b in -17i64..=17)| {
        let sp = |x: i64| Scalar::from_i64(spec, x).specialize_t(&f, &one).unwrap();
        prop_assert_eq!(sp(a + b), f.add(&sp(a), &sp(b)));
        prop_assert_eq!(sp(a * b), f.mul(&sp(a), &sp(b)));
    });
}

#[test]
fn specialization_examples() {
    let f5 = Field::new(FieldSpec::prime(5)).unwrap();
    let s = Scalar::parse(eq0(3), "1 + t").unwrap();
    assert_eq!(s.specialize_t(&f5, &f5.from_i64(2)).unwrap(), f5.from_i64(3));
    let f7 = Field::new(FieldSpec::prime(7)).unwrap();
    let s = Scalar::parse(eqp(7, 3), "3*t^2").unwrap();
    assert_eq!(s.specialize_t(&f7, &f7.one()).unwrap(), f7.from_i64(3));
    let s = Scalar::parse(eq0(2), "1/5").unwrap();
    assert!(matches!(s.specialize_t(&f5, &f5.one()), Err(Error::DenominatorCollision(..))));
}

#[test]
fn division_by_t_undoes_multiplication() {
    for spec in kinds() {
        proptest!(cfg(256), |(a in scalar(spec))| {
            let b = a.truncate_to(spec.n() - 1);
            // the top coefficient of a quotient is not determined
            prop_assert_eq!(b.mul_t_pow(1).div_t().unwrap().truncate_to(spec.n() - 1), b);
        });
    }
}
