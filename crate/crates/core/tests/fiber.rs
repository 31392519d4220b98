mod common;

use common::*;
use proptest::prelude::*;
use toric_deform::campaign::{run_campaign, FuzzBounds};
use toric_deform::fiber::*;
use toric_deform::job::{run_normalize, JobDocument, Normalized};
use toric_deform::oracle::*;
use toric_deform::shift::NormalizedDeformation;
use toric_deform::*;

fn job(base: &str, chain: &str, h: &str) -> JobDocument {
    JobDocument::from_json(&format!(
        r#"{{"base":{base},"chain":"{chain}","deformation":{{"consecutive":{{{h}}}}}}}"#
    ))
    .unwrap()
}

fn normal(j: &JobDocument) -> NormalizedDeformation {
    match run_normalize(j).unwrap() {
        Normalized::Done { normal, .. } => normal,
        Normalized::Obstructed(o) => panic!("obstructed: {o:?}"),
    }
}

fn all_reports(d: &NormalizedDeformation, q: FieldSpec) -> Vec<(Vec<String>, Verdict, Option<(usize, usize)>, Vec<u32>)> {
    let f = Field::new(q).unwrap();
    let tau = f.one();
    let s = specialize_ideal(&d.generators, &f, &tau).unwrap();
    enumerate_points(&s, 1, DEFAULT_BUDGET)
        .unwrap()
        .into_iter()
        .map(|p| {
            let r = analyze_point(d, &PointSpec::new(f.clone(), tau.clone(), p)).unwrap();
            (r.point, r.verdict, r.window, r.b)
        })
        .collect()
}

#[test]
fn analysis_is_stable_under_truncation() {
    let jobs = [
        job(r#"{"kind":"equal-char-0","truncation":3}"#, "[2]", r#""2":"x2""#),
        job(r#"{"kind":"equal-char-0","truncation":3}"#, "[4]", r#""2":"x2^2""#),
        job(r#"{"kind":"equal-char-0","truncation":3}"#, "[3,2]", r#""2":"x2^2 + t*x2""#),
        job(r#"{"kind":"equal-char-p","p":5,"truncation":3}"#, "[2,3]", r#""3":"2*x3^3 + x3""#),
        job(r#"{"kind":"mixed-char","p":5,"truncation":3}"#, "[4]", r#""2":"x2^2""#),
    ];
    for j in &jobs {
        let q = if j.base.kind() == DvrKind::MixedChar { FieldSpec::prime(7) } else { FieldSpec::prime(5) };
        let wide = j.with_truncation(j.base.n() + 2).unwrap();
        assert_eq!(all_reports(&normal(j), q), all_reports(&normal(&wide), q), "{}", j.chain);
    }
}

#[test]
fn walkthrough_a3_at_the_origin() {
    let d = normal(&job(r#"{"kind":"equal-char-0","truncation":3}"#, "[4]", r#""2":"x2^2""#));
    let f = Field::new(FieldSpec::prime(5)).unwrap();
    let r = analyze_point(&d, &PointSpec::new(f.clone(), f.one(), vec![f.zero(); 3])).unwrap();
    assert_eq!(r.verdict, Verdict::Singular);
    assert_eq!(r.reduced, vec![2]);
    assert_eq!((r.e_prime, r.n_prime, r.n), (3, 2, 4));
    assert!(r.semicontinuity.holds());
}

#[test]
fn off_fiber_points_are_rejected() {
    let d = normal(&job(r#"{"kind":"equal-char-0","truncation":3}"#, "[2]", r#""2":"1""#));
    let f = Field::new(FieldSpec::prime(5)).unwrap();
    let r = analyze_point(&d, &PointSpec::new(f.clone(), f.one(), vec![f.zero(); 3]));
    assert!(matches!(r, Err(Error::PointNotOnFiber(_))));
}

#[test]
fn jacobian_rank_ignores_order_and_scaling() {
    let d = normal(&job(r#"{"kind":"equal-char-0","truncation":3}"#, "[2,2]", r#""2":"x2^2""#));
    let f = Field::new(FieldSpec::prime(7)).unwrap();
    let s = specialize_ideal(&d.generators, &f, &f.one()).unwrap();
    let points = enumerate_points(&s, 1, DEFAULT_BUDGET).unwrap();
    let k = s.polys.len();
    proptest!(cfg(64), |(perm in Just((0..k).collect::<Vec<_>>()).prop_shuffle(), units in prop::collection::vec(1i64..7, k))| {
        let mut t = s.clone();
        t.polys = perm
            .iter()
            .zip(&units)
            .map(|(&i, &u)| s.polys[i].iter().map(|(m, c)| (m.clone(), f.mul(c, &f.from_i64(u)))).collect())
            .collect();
        for p in &points {
            prop_assert_eq!(jacobian_corank(&t, p).unwrap(), jacobian_corank(&s, p).unwrap());
        }
    });
}

#[test]
fn oracle_counts_points_of_the_a1_cone() {
    let c = chain(&[2]);
    let gs = GeneratorSet::trivial(&c, ring(&c, eq0(1))).unwrap();
    let f = Field::new(FieldSpec::prime(3)).unwrap();
    let s = specialize_ideal(&gs, &f, &f.one()).unwrap();
    // x1 x3 = x2^2 over F_3: x2 = 0 gives 5 points, x2 = +-1 gives 2 each
    assert_eq!(enumerate_points(&s, 1, DEFAULT_BUDGET).unwrap().len(), 9);
    let singular = smooth_scan(&s, 1, DEFAULT_BUDGET).unwrap();
    assert_eq!(singular.len(), 1);
    assert_eq!(singular[0].1, 3);
}

#[test]
fn oracle_respects_the_budget() {
    let c = chain(&[2, 2, 2]);
    let gs = GeneratorSet::trivial(&c, ring(&c, eq0(1))).unwrap();
    let f = Field::new(FieldSpec::prime(11)).unwrap();
    let s = specialize_ideal(&gs, &f, &f.one()).unwrap();
    assert!(matches!(enumerate_points(&s, 1, 1000), Err(Error::BudgetExceeded(_))));
}

#[test]
fn analyzer_agrees_with_the_oracle_on_random_draws() {
    for (base, fields) in [
        (eq0(3), vec![FieldSpec::prime(5), FieldSpec::prime(7)]),
        (eqp(3, 3), vec![FieldSpec::prime(3), FieldSpec::Finite { p: 3, m: 2 }]),
        (mixed(5, 3), vec![FieldSpec::prime(7)]),
    ] {
        let mut b = FuzzBounds::new(base);
        b.fields = fields;
        let (report, _) = run_campaign(&b, 99, 60).unwrap();
        assert!(report.passed(), "{}", report.to_json());
        assert!(report.tally.passed > 10, "{:?}", report.tally);
        assert_eq!(report.tally.semicontinuity_violations, 0);
    }
}
