//! Brute-force check of the generic fiber over a finite field: enumerate its
//! points and measure the Jacobian corank at each. Works from the generator
//! set alone, without the normal form.

use rayon::prelude::*;

use crate::deform::GeneratorSet;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem, FieldSpec};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Polynomial over a field as `(exponents, coefficient)` pairs.
pub type Poly = Vec<(Vec<u32>, FieldElem)>;

#[derive(Debug, Clone)]
pub struct SpecializedIdeal {
    pub field: Field,
    pub tau: FieldElem,
    pub e: usize,
    pub polys: Vec<Poly>,
}

pub fn specialize_ideal(gs: &GeneratorSet, field: &Field, tau: &FieldElem) -> Result<SpecializedIdeal> {
    if field.is_zero(tau) {
        return Err(Error::BadSpecialization("tau must be nonzero".into()));
    }
    let polys = gs
        .generators()
        .map(|(_, g)| {
            Ok(g.specialize(field, tau)?
                .into_iter()
                .map(|(m, c)| (m.exps().to_vec(), c))
                .collect())
        })
        .collect::<Result<Vec<Poly>>>()?;
    Ok(SpecializedIdeal { field: field.clone(), tau: tau.clone(), e: gs.e(), polys })
}

fn eval(field: &Field, p: &Poly, point: &[FieldElem]) -> FieldElem {
    let mut acc = field.zero();
    for (exps, c) in p {
        let mut v = c.clone();
        for (x, &k) in point.iter().zip(exps) {
            if k > 0 {
                v = field.mul(&v, &field.pow(x, k));
            }
        }
        acc = field.add(&acc, &v);
    }
    acc
}

fn last_variable(p: &Poly) -> usize {
    p.iter()
        .filter_map(|(exps, _)| exps.iter().rposition(|&k| k > 0))
        .max()
        .map_or(0, |k| k + 1)
}

impl SpecializedIdeal {
    pub fn field_spec(&self) -> FieldSpec {
        self.field.spec()
    }

    /// The same ideal with coefficients read in `F_{p^m}`; only prime fields
    /// can be extended.
    pub fn extend(&self, m: u32) -> Result<SpecializedIdeal> {
        if m == 1 {
            return Ok(self.clone());
        }
        let p = match self.field.spec() {
            FieldSpec::Finite { p, m: 1 } => p,
            other => return Err(Error::InvalidField(format!("cannot extend {other:?}"))),
        };
        let big = Field::new(FieldSpec::Finite { p, m })?;
        let embed = |x: &FieldElem| match x {
            FieldElem::Finite(k) => big.elem(*k),
            FieldElem::Rational(_) => unreachable!("finite field element"),
        };
        Ok(SpecializedIdeal {
            field: big.clone(),
            tau: embed(&self.tau),
            e: self.e,
            polys: self.polys.iter().map(|p| p.iter().map(|(x, c)| (x.clone(), embed(c))).collect()).collect(),
        })
    }

    pub fn vanishes_at(&self, point: &[FieldElem]) -> bool {
        self.polys.iter().all(|p| self.field.is_zero(&eval(&self.field, p, point)))
    }
}

/// All points of the variety over `F_{q^m}`, sorted.
pub fn enumerate_points(s: &SpecializedIdeal, m: u32, budget: u64) -> Result<Vec<Vec<FieldElem>>> {
    let s = s.extend(m)?;
    let q = match s.field.finite() {
        Some(f) => f.size() as u64,
        None => return Err(Error::InvalidField("enumeration needs a finite field".into())),
    };
    let total = (q as u128).checked_pow(s.e as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded(budget));
    }
    // polynomials grouped by the last variable they involve
    let mut by_last: Vec<Vec<&Poly>> = vec![Vec::new(); s.e + 1];
    for p in &s.polys {
        by_last[last_variable(p)].push(p);
    }
    if by_last[0].iter().any(|p| !s.field.is_zero(&eval(&s.field, p, &[]))) {
        return Ok(Vec::new());
    }
    if s.e == 0 {
        return Ok(vec![Vec::new()]);
    }
    let elems: Vec<FieldElem> = (0..q as u32).map(|k| s.field.elem(k)).collect();
    let mut points: Vec<Vec<FieldElem>> = elems
        .par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            let mut point = vec![s.field.zero(); s.e];
            point[0] = first.clone();
            search(&s, &by_last, &elems, &mut point, 1, &mut out);
            out
        })
        .collect();
    points.sort();
    Ok(points)
}

fn search(
    s: &SpecializedIdeal,
    by_last: &[Vec<&Poly>],
    elems: &[FieldElem],
    point: &mut Vec<FieldElem>,
    assigned: usize,
    out: &mut Vec<Vec<FieldElem>>,
) {
    if by_last[assigned].iter().any(|p| !s.field.is_zero(&eval(&s.field, p, point))) {
        return;
    }
    if assigned == s.e {
        out.push(point.clone());
        return;
    }
    for x in elems {
        point[assigned] = x.clone();
        search(s, by_last, elems, point, assigned + 1, out);
    }
    point[assigned] = s.field.zero();
}

fn derivative(field: &Field, p: &Poly, var: usize) -> Poly {
    p.iter()
        .filter(|(exps, _)| exps[var] > 0)
        .map(|(exps, c)| {
            let mut d = exps.clone();
            d[var] -= 1;
            (d, field.mul(c, &field.from_i64(exps[var] as i64)))
        })
        .collect()
}

fn rank(field: &Field, mut rows: Vec<Vec<FieldElem>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&k| !field.is_zero(&rows[k][c])) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = field.inv(&rows[r][c]).expect("nonzero pivot");
        for k in 0..rows.len() {
            if k != r && !field.is_zero(&rows[k][c]) {
                let factor = field.mul(&rows[k][c], &inv);
                for j in c..cols {
                    let v = field.mul(&factor, &rows[r][j]);
                    rows[k][j] = field.sub(&rows[k][j], &v);
                }
            }
        }
        r += 1;
    }
    r
}

/// `e` minus the rank of the Jacobian matrix at a point of the variety.
pub fn jacobian_corank(s: &SpecializedIdeal, point: &[FieldElem]) -> Result<usize> {
    if point.len() != s.e {
        return Err(Error::VariableMismatch { expected: s.e, got: point.len() });
    }
    if !s.vanishes_at(point) {
        return Err(Error::PointNotOnVariety);
    }
    let rows = s
        .polys
        .iter()
        .map(|p| (0..s.e).map(|v| eval(&s.field, &derivative(&s.field, p, v), point)).collect())
        .collect();
    Ok(s.e - rank(&s.field, rows))
}

/// Points where the corank exceeds the surface dimension.
pub fn smooth_scan(s: &SpecializedIdeal, m: u32, budget: u64) -> Result<Vec<(Vec<FieldElem>, usize)>> {
    let s = s.extend(m)?;
    let points = enumerate_points(&s, 1, budget)?;
    let mut out = Vec::new();
    for p in points {
        let c = jacobian_corank(&s, &p)?;
        if c > 2 {
            out.push((p, c));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::chain::Chain;
    use crate::deform::complete_to_flat;
    use crate::scalars::DvrSpec;
    use crate::series::{Series, SeriesRing};

    fn ideal(field: &Field, polys: &[&[(&[u32], i64)]]) -> SpecializedIdeal {
        let e = polys.iter().flat_map(|p| p.iter().map(|(x, _)| x.len())).max().unwrap_or(1);
        SpecializedIdeal {
            field: field.clone(),
            tau: field.one(),
            e,
            polys: polys
                .iter()
                .map(|p| p.iter().map(|(x, c)| (x.to_vec(), field.from_i64(*c))).collect())
                .collect(),
        }
    }

    fn gs(a: &[u32], h: &[(usize, &str)]) -> GeneratorSet {
        let c = Chain::new(a.to_vec());
        let r = SeriesRing::new(c.e(), DvrSpec::equal_char_zero(3).unwrap(), c.default_cap());
        let h: BTreeMap<usize, Series> = h.iter().map(|(i, s)| (*i, r.parse(s).unwrap())).collect();
        complete_to_flat(&c, r, &h).unwrap().flat().unwrap()
    }

    fn f(p: u64) -> Field {
        Field::new(FieldSpec::prime(p)).unwrap()
    }

    #[test]
    fn specialization_examples() {
        let f5 = f(5);
        let s = specialize_ideal(&gs(&[2], &[(2, "x2")]), &f5, &f5.from_i64(2)).unwrap();
        assert_eq!(s.polys.len(), 1);
        let expected: Poly = vec![
            (vec![0, 1, 0], f5.from_i64(2)),
            (vec![0, 2, 0], f5.from_i64(-1)),
            (vec![1, 0, 1], f5.one()),
        ];
        let mut got = s.polys[0].clone();
        got.sort();
        let mut want = expected;
        want.sort();
        assert_eq!(got, want);
        let g = gs(&[2], &[(2, "1/5*x2")]);
        assert!(matches!(specialize_ideal(&g, &f5, &f5.one()), Err(Error::DenominatorCollision(5))));
    }

    #[test]
    fn point_counts() {
        let f3 = f(3);
        let cone = ideal(&f3, &[&[(&[1, 0, 1], 1), (&[0, 2, 0], -1)]]);
        let mut brute = 0;
        for x1 in 0..3 {
            for x2 in 0..3 {
                for x3 in 0..3 {
                    if (x1 * x3 - x2 * x2) % 3 == 0 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(enumerate_points(&cone, 1, DEFAULT_BUDGET).unwrap().len(), brute);
        assert_eq!(brute, 9);
        let f5 = f(5);
        let line = SpecializedIdeal { field: f5.clone(), tau: f5.one(), e: 1, polys: vec![] };
        assert_eq!(enumerate_points(&line, 1, DEFAULT_BUDGET).unwrap().len(), 5);
        let origin = ideal(&f5, &[&[(&[1, 0, 0], 1)], &[(&[0, 1, 0], 1)], &[(&[0, 0, 1], 1)]]);
        assert_eq!(enumerate_points(&origin, 1, DEFAULT_BUDGET).unwrap().len(), 1);
        assert_eq!(enumerate_points(&cone, 1, 10), Err(Error::BudgetExceeded(10)));
    }

    #[test]
    fn corank_examples() {
        let f5 = f(5);
        let zero = vec![f5.zero(); 3];
        let cone = ideal(&f5, &[&[(&[1, 0, 1], 1), (&[0, 2, 0], -1)]]);
        assert_eq!(jacobian_corank(&cone, &zero).unwrap(), 3);
        let smooth = ideal(&f5, &[&[(&[1, 0, 1], 1), (&[0, 2, 0], -1), (&[0, 1, 0], 1)]]);
        assert_eq!(jacobian_corank(&smooth, &zero).unwrap(), 2);
        let line = ideal(&f5, &[&[(&[1], 1)]]);
        assert_eq!(jacobian_corank(&line, &[f5.zero()]).unwrap(), 0);
        assert_eq!(jacobian_corank(&line, &[f5.one()]), Err(Error::PointNotOnVariety));
    }

    #[test]
    fn scan_examples() {
        let f5 = f(5);
        let s = specialize_ideal(&gs(&[2], &[(2, "x2")]), &f5, &f5.one()).unwrap();
        assert!(smooth_scan(&s, 1, DEFAULT_BUDGET).unwrap().is_empty());
        let s = specialize_ideal(&gs(&[2], &[]), &f5, &f5.one()).unwrap();
        assert_eq!(smooth_scan(&s, 1, DEFAULT_BUDGET).unwrap(), vec![(vec![f5.zero(); 3], 3)]);
        // x1 x3 - x2^4 + x2^2: the gradient (x3, 2x2 - 4x2^3, x1) vanishes
        // only at the origin among points with x1 = x3 = 0 and x2^2 (x2^2 - 1) = 0
        let s = specialize_ideal(&gs(&[4], &[(2, "x2^2")]), &f5, &f5.one()).unwrap();
        assert_eq!(smooth_scan(&s, 1, DEFAULT_BUDGET).unwrap(), vec![(vec![f5.zero(); 3], 3)]);
    }

    #[test]
    fn extension_fields_see_more_points() {
        let f3 = f(3);
        // x1^2 + 1 has no root over F_3 but two over F_9
        let s = ideal(&f3, &[&[(&[2], 1), (&[0], 1)]]);
        assert!(enumerate_points(&s, 1, DEFAULT_BUDGET).unwrap().is_empty());
        assert_eq!(enumerate_points(&s, 2, DEFAULT_BUDGET).unwrap().len(), 2);
    }
}
