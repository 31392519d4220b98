//! Singularities of the generic fiber, read off the normal form.
//!
//! At a point `lambda` the relevant window of indices runs from the last
//! index where `x_i + tau c_i` is a unit down to the first index where `x_i`
//! is a unit; outside it every variable can be eliminated. Inside it the
//! fiber is locally `X(b)` with `b_i` the order of vanishing of
//! `x^{a_i} - tau (x h_i(x) + k_i)` at `lambda_i`.

use serde::Serialize;

use crate::chain::{hj_value, reduce_chain, Chain, Reduced};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem, FieldSpec};
use crate::shift::NormalizedDeformation;

#[derive(Debug, Clone)]
pub struct PointSpec {
    pub field: Field,
    pub tau: FieldElem,
    pub lambda: Vec<FieldElem>,
}

impl PointSpec {
    pub fn new(field: Field, tau: FieldElem, lambda: Vec<FieldElem>) -> Self {
        PointSpec { field, tau, lambda }
    }

    /// Parse `tau` and the coordinates with the field's literal syntax.
    pub fn parse(spec: FieldSpec, tau: &str, lambda: &[String]) -> Result<Self> {
        let field = Field::new(spec)?;
        let tau = field.parse_elem(tau)?;
        let lambda = lambda.iter().map(|s| field.parse_elem(s)).collect::<Result<Vec<_>>>()?;
        Ok(PointSpec { field, tau, lambda })
    }

    pub fn render(&self) -> Vec<String> {
        self.lambda.iter().map(|x| self.field.render(x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Smooth,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Semicontinuity {
    pub embedding_dimension: bool,
    pub chain_domination: bool,
    pub order: bool,
}

impl Semicontinuity {
    pub fn holds(&self) -> bool {
        self.embedding_dimension && self.chain_domination && self.order
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SingularityReport {
    pub point: Vec<String>,
    pub verdict: Verdict,
    /// First and last index of the window, clipped to `2..=e-1`.
    pub window: Option<(usize, usize)>,
    /// Raw b-chain over the window.
    pub b: Vec<u32>,
    /// Reduced chain; empty when the point is smooth.
    pub reduced: Vec<u32>,
    pub e_prime: usize,
    pub n_prime: u64,
    pub n: u64,
    /// First chain index of the window, as an offset into the chain.
    pub offset: usize,
    pub semicontinuity: Semicontinuity,
}

/// Order of vanishing at `at` of a polynomial given by increasing coefficients.
fn order_at(field: &Field, coeffs: &[FieldElem], at: &FieldElem) -> Option<u32> {
    let mut poly = coeffs.to_vec();
    while poly.last().is_some_and(|c| field.is_zero(c)) {
        poly.pop();
    }
    if poly.is_empty() {
        return None;
    }
    let mut order = 0;
    loop {
        // synthetic division by (x - at)
        let mut quotient = vec![field.zero(); poly.len() - 1];
        let mut carry = field.zero();
        for k in (0..poly.len()).rev() {
            carry = field.add(&poly[k], &field.mul(&carry, at));
            if k > 0 {
                quotient[k - 1] = carry.clone();
            }
        }
        if !field.is_zero(&carry) {
            return Some(order);
        }
        order += 1;
        poly = quotient;
    }
}

/// Specialized `x^{a_i} - tau (x h_i + k_i)` in increasing degree.
fn local_equation(d: &NormalizedDeformation, i: usize, p: &PointSpec) -> Result<Vec<FieldElem>> {
    let f = &p.field;
    let a = d.chain().a(i) as usize;
    let t = d.generators.ring().spec().t_value(f, &p.tau);
    let mut out = vec![f.zero(); a + 1];
    for (k, c) in d.local_polynomial(i).iter().enumerate() {
        let v = f.mul(&t, &c.specialize_t(f, &p.tau)?);
        out[k] = f.sub(&out[k], &v);
    }
    out[a] = f.add(&out[a], &f.one());
    Ok(out)
}

/// Check that the point satisfies every generator of the normalized set.
pub fn ensure_on_fiber(d: &NormalizedDeformation, p: &PointSpec) -> Result<()> {
    if p.lambda.len() != d.e() {
        return Err(Error::VariableMismatch { expected: d.e(), got: p.lambda.len() });
    }
    for ((i, j), g) in d.generators.generators() {
        let v = g.evaluate(&p.lambda, &p.field, &p.tau)?;
        if !p.field.is_zero(&v) {
            return Err(Error::PointNotOnFiber(format!(
                "g{i},{j} = {} at ({})",
                p.field.render(&v),
                p.render().join(", ")
            )));
        }
    }
    Ok(())
}

pub fn analyze_point(d: &NormalizedDeformation, p: &PointSpec) -> Result<SingularityReport> {
    ensure_on_fiber(d, p)?;
    let f = &p.field;
    let e = d.e();
    let chain = d.chain();
    let n = hj_value(chain)?.0;
    let lam = |i: usize| &p.lambda[i - 1];

    let t = d.generators.ring().spec().t_value(f, &p.tau);
    let i_e = (1..=e).find(|&i| !f.is_zero(lam(i))).unwrap_or(e + 1);
    let mut i_1 = 0;
    for i in (1..=e).rev() {
        let shifted = f.add(lam(i), &f.mul(&t, &d.c_at(i).specialize_t(f, &p.tau)?));
        if !f.is_zero(&shifted) {
            i_1 = i;
            break;
        }
    }
    let smooth = |window| SingularityReport {
        point: p.render(),
        verdict: Verdict::Smooth,
        window,
        b: Vec::new(),
        reduced: Vec::new(),
        e_prime: 2,
        n_prime: 1,
        n,
        offset: 0,
        semicontinuity: Semicontinuity { embedding_dimension: true, chain_domination: true, order: true },
    };
    if i_1 > i_e {
        return Ok(smooth(None));
    }
    let (lo, hi) = (i_1.max(2), i_e.min(e - 1));
    let mut b = Vec::new();
    for i in lo..=hi {
        let eq = local_equation(d, i, p)?;
        let order = order_at(f, &eq, lam(i))
            .ok_or_else(|| Error::DegenerateSpecialization(format!("local equation at x{i} vanishes")))?;
        b.push(order);
    }
    let raw: Vec<i64> = b.iter().map(|&x| x as i64).collect();
    let reduced = match reduce_chain(&raw) {
        Reduced::Smooth => {
            let mut r = smooth(Some((lo, hi)));
            r.b = b;
            r.offset = lo.saturating_sub(2);
            return Ok(r);
        }
        Reduced::Singular(c) => c,
    };
    let n_prime = hj_value(&reduced)?.0;
    let e_prime = reduced.e();
    let offset = lo - 2;
    let a = chain.entries();
    let semicontinuity = Semicontinuity {
        embedding_dimension: e_prime <= e,
        chain_domination: Chain::sub_chain_dominates(&b, a, offset)
            && (0..=e.saturating_sub(e_prime)).any(|l| Chain::sub_chain_dominates(reduced.entries(), a, l)),
        order: n_prime <= n,
    };
    Ok(SingularityReport {
        point: p.render(),
        verdict: Verdict::Singular,
        window: Some((lo, hi)),
        b,
        reduced: reduced.entries().to_vec(),
        e_prime,
        n_prime,
        n,
        offset,
        semicontinuity,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SemicontinuitySummary {
    pub checked: usize,
    pub singular: usize,
    pub passed: bool,
    pub counterexamples: Vec<SingularityReport>,
}

pub fn semicontinuity_report(reports: &[SingularityReport]) -> SemicontinuitySummary {
    let counterexamples: Vec<_> = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Singular && !r.semicontinuity.holds())
        .cloned()
        .collect();
    SemicontinuitySummary {
        checked: reports.len(),
        singular: reports.iter().filter(|r| r.verdict == Verdict::Singular).count(),
        passed: counterexamples.is_empty(),
        counterexamples,
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::deform::complete_to_flat;
    use crate::scalars::DvrSpec;
    use crate::series::{Series, SeriesRing};
    use crate::shift::normalize;

    fn normalized(a: &[u32], h: &[(usize, &str)]) -> NormalizedDeformation {
        let c = Chain::new(a.to_vec());
        let r = SeriesRing::new(c.e(), DvrSpec::equal_char_zero(3).unwrap(), c.default_cap());
        let h: BTreeMap<usize, Series> = h.iter().map(|(i, s)| (*i, r.parse(s).unwrap())).collect();
        normalize(&complete_to_flat(&c, r, &h).unwrap().flat().unwrap()).unwrap()
    }

    fn point(p: u64, coords: &[i64]) -> PointSpec {
        let f = Field::new(FieldSpec::prime(p)).unwrap();
        let lambda = coords.iter().map(|&x| f.from_i64(x)).collect();
        PointSpec::new(f.clone(), f.one(), lambda)
    }

    #[test]
    fn order_of_vanishing() {
        let f = Field::new(FieldSpec::prime(5)).unwrap();
        let v = |xs: &[i64]| xs.iter().map(|&x| f.from_i64(x)).collect::<Vec<_>>();
        // (x - 1)^2 (x + 1) = x^3 - x^2 - x + 1
        assert_eq!(order_at(&f, &v(&[1, -1, -1, 1]), &f.one()), Some(2));
        assert_eq!(order_at(&f, &v(&[1, -1, -1, 1]), &f.from_i64(2)), Some(0));
        assert_eq!(order_at(&f, &v(&[0, 0]), &f.one()), None);
    }

    #[test]
    fn b_chain_examples() {
        assert_eq!(normalized(&[3, 2], &[]).b_chain(), vec![3, 2]);
        assert_eq!(normalized(&[4], &[(2, "x2^2")]).b_chain(), vec![2]);
        assert_eq!(normalized(&[2], &[(2, "x2")]).b_chain(), vec![1]);
    }

    #[test]
    fn undeformed_origin_keeps_its_type() {
        let d = normalized(&[2, 2], &[]);
        let r = analyze_point(&d, &point(5, &[0, 0, 0, 0])).unwrap();
        assert_eq!(r.verdict, Verdict::Singular);
        assert_eq!(r.window, Some((2, 3)));
        assert_eq!(r.b, vec![2, 2]);
        assert_eq!(r.reduced, vec![2, 2]);
        assert_eq!((r.e_prime, r.n_prime, r.n), (4, 3, 3));
        assert!(semicontinuity_report(&[r]).passed);
    }

    #[test]
    fn smoothing_of_a1() {
        let d = normalized(&[2], &[(2, "x2")]);
        let r = analyze_point(&d, &point(5, &[0, 0, 0])).unwrap();
        assert_eq!(r.verdict, Verdict::Smooth);
        assert_eq!(r.b, vec![1]);
        assert!(matches!(
            analyze_point(&d, &point(5, &[1, 1, 1])),
            Err(Error::PointNotOnFiber(_))
        ));
    }

    #[test]
    fn a3_splits_into_a1() {
        let d = normalized(&[4], &[(2, "x2^2")]);
        let r = analyze_point(&d, &point(5, &[0, 0, 0])).unwrap();
        assert_eq!(r.verdict, Verdict::Singular);
        assert_eq!(r.reduced, vec![2]);
        assert_eq!((r.e_prime, r.n_prime, r.n), (3, 2, 4));
        assert!(r.semicontinuity.holds());
        // x2 = 1 solves x2^4 = x2^2 but the local equation is x1 x3 - 2(x2 - 1)
        let r = analyze_point(&d, &point(5, &[0, 1, 0])).unwrap();
        assert_eq!(r.verdict, Verdict::Smooth);
    }

    #[test]
    fn unit_coordinate_is_smooth() {
        let d = normalized(&[2], &[]);
        let r = analyze_point(&d, &point(7, &[0, 0, 3])).unwrap();
        assert_eq!(r.verdict, Verdict::Smooth);
    }
}
