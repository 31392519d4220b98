//! Sparse truncated power series in `x_1..x_e` over the DVR.
//!
//! Everything stays polynomial in `x`: a configured total-degree cap turns
//! runaway growth into [`Error::DegreeCapExceeded`] rather than silently
//! dropping terms. Truncation in `t` is exact and lives in the coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};
use crate::parse::parse_poly;
use crate::scalars::{DvrKind, DvrSpec, Scalar};

/// Exponent vector of a monomial in `x_1..x_e` (index 0 is `x_1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct XMonomial(Vec<u32>);

impl Ord for XMonomial {
    /// Graded lexicographic: total degree first, then exponents of
    /// `x_1, x_2, ...` in turn.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for XMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl XMonomial {
    pub fn one(e: usize) -> Self {
        XMonomial(vec![0; e])
    }

    /// `x_i`, 1-based.
    pub fn var(e: usize, i: usize) -> Self {
        let mut m = Self::one(e);
        m.0[i - 1] = 1;
        m
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        XMonomial(exps)
    }

    /// `x_i^k`, 1-based.
    pub fn power(e: usize, i: usize, k: u32) -> Self {
        let mut m = Self::one(e);
        m.0[i - 1] = k;
        m
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn e(&self) -> usize {
        self.0.len()
    }

    /// Exponent of `x_i`, 1-based.
    pub fn exp(&self, i: usize) -> u32 {
        self.0[i - 1]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn mul(&self, other: &XMonomial) -> XMonomial {
        XMonomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &XMonomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &XMonomial) -> Option<XMonomial> {
        other
            .divides(self)
            .then(|| XMonomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    /// Smallest and largest 1-based index of a variable present.
    pub fn support_range(&self) -> Option<(usize, usize)> {
        let lo = self.0.iter().position(|&k| k > 0)?;
        let hi = self.0.iter().rposition(|&k| k > 0)?;
        Some((lo + 1, hi + 1))
    }

    /// Supported on at most two consecutive variables.
    pub fn is_compact(&self) -> bool {
        self.support_range().map_or(true, |(lo, hi)| hi - lo <= 1)
    }

    /// Only `x_l` may occur.
    pub fn is_pure_power_of(&self, l: usize) -> bool {
        self.0.iter().enumerate().all(|(i, &k)| k == 0 || i + 1 == l)
    }
}

impl fmt::Display for XMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &k) in self.0.iter().enumerate() {
            if k == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if k == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, k)?;
            }
        }
        Ok(())
    }
}

/// Variable count, base ring and total-degree cap shared by a family of series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeriesRing {
    e: usize,
    spec: DvrSpec,
    cap: u32,
}

impl SeriesRing {
    pub fn new(e: usize, spec: DvrSpec, cap: u32) -> Self {
        SeriesRing { e, spec, cap }
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn spec(&self) -> DvrSpec {
        self.spec
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn with_spec(&self, spec: DvrSpec) -> Self {
        SeriesRing { spec, ..*self }
    }

    pub fn with_cap(&self, cap: u32) -> Self {
        SeriesRing { cap, ..*self }
    }

    pub fn zero(&self) -> Series {
        Series { ring: *self, terms: BTreeMap::new() }
    }

    pub fn one(&self) -> Series {
        self.constant(Scalar::one(self.spec))
    }

    pub fn constant(&self, c: Scalar) -> Series {
        self.term(XMonomial::one(self.e), c)
    }

    /// `x_i`, 1-based.
    pub fn var(&self, i: usize) -> Series {
        self.term(XMonomial::var(self.e, i), Scalar::one(self.spec))
    }

    /// `c * m`. The monomial is assumed to respect the cap.
    pub fn term(&self, m: XMonomial, c: Scalar) -> Series {
        let mut s = self.zero();
        if !c.is_zero() {
            s.terms.insert(m, c);
        }
        s
    }

    /// Parse a series literal, e.g. `x1*x3 - x2^2 + (1 + t)*t*x2`.
    pub fn parse(&self, s: &str) -> Result<Series> {
        let raw = parse_poly(s)?;
        if raw.max_variable() > self.e {
            return Err(Error::VariableMismatch { expected: self.e, got: raw.max_variable() });
        }
        let mut out = self.zero();
        for ((k, x), c) in &raw.terms {
            let mut exps = x.clone();
            exps.resize(self.e, 0);
            let c = Scalar::term(self.spec, c, *k)?;
            out.add_term(XMonomial(exps), c)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Series {
    ring: SeriesRing,
    terms: BTreeMap<XMonomial, Scalar>,
}

impl Series {
    pub fn ring(&self) -> SeriesRing {
        self.ring
    }

    pub fn spec(&self) -> DvrSpec {
        self.ring.spec
    }

    pub fn e(&self) -> usize {
        self.ring.e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&XMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &XMonomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(|| Scalar::zero(self.ring.spec))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(XMonomial::degree).max().unwrap_or(0)
    }

    fn check_ring(&self, other: &Series) -> Result<()> {
        if self.ring.spec != other.ring.spec {
            return Err(Error::SpecMismatch(self.ring.spec, other.ring.spec));
        }
        if self.ring.e != other.ring.e {
            return Err(Error::VariableMismatch { expected: self.ring.e, got: other.ring.e });
        }
        Ok(())
    }

    /// Add `c * m` in place.
    pub fn add_term(&mut self, m: XMonomial, c: Scalar) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        c.ensure_same(&Scalar::zero(self.ring.spec))?;
        if m.e() != self.ring.e {
            return Err(Error::VariableMismatch { expected: self.ring.e, got: m.e() });
        }
        let d = m.degree();
        if d > self.ring.cap {
            return Err(Error::DegreeCapExceeded { degree: d, cap: self.ring.cap });
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                let sum = &*slot + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, c: &Scalar) -> Series {
        self.map_coeffs(|x| x * c)
    }

    /// Apply `f` to every coefficient, dropping zeros.
    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Series {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let v = f(c);
                (!v.is_zero()).then(|| (m.clone(), v))
            })
            .collect();
        Series { ring: self.ring, terms }
    }

    /// Keep the terms satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(&XMonomial, &Scalar) -> bool) -> Series {
        let terms = self
            .terms
            .iter()
            .filter(|(m, c)| keep(m, c))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Series { ring: self.ring, terms }
    }

    /// Multiply by `c * m`.
    pub fn mul_term(&self, m: &XMonomial, c: &Scalar) -> Result<Series> {
        let mut out = self.ring.zero();
        for (mm, cc) in &self.terms {
            out.add_term(mm.mul(m), cc * c)?;
        }
        Ok(out)
    }

    /// `self += c * m * other`, in place.
    pub fn add_mul_term(&mut self, other: &Series, m: &XMonomial, c: &Scalar) -> Result<()> {
        self.check_ring(other)?;
        for (mm, cc) in &other.terms {
            let v = cc * c;
            if !v.is_zero() {
                self.add_term(mm.mul(m), v)?;
            }
        }
        Ok(())
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_ring(other)?;
        let mut out = self.ring.zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                if !c.is_zero() {
                    out.add_term(ma.mul(mb), c)?;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Series> {
        let mut acc = self.ring.one();
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Minimum t-valuation over all coefficients; `N + 1` for zero.
    pub fn min_t_degree(&self) -> u32 {
        self.terms
            .values()
            .map(Scalar::valuation)
            .min()
            .unwrap_or(self.ring.spec.n() + 1)
    }

    /// Keep t-degrees `<= m`.
    pub fn truncate_to(&self, m: u32) -> Series {
        self.map_coeffs(|c| c.truncate_to(m))
    }

    pub fn mul_t_pow(&self, k: u32) -> Series {
        self.map_coeffs(|c| c.mul_t_pow(k))
    }

    /// Divide every coefficient by `t`.
    pub fn div_t(&self) -> Result<Series> {
        let mut out = self.ring.zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.div_t()?)?;
        }
        Ok(out)
    }

    /// Special fiber: the residue of every coefficient, re-embedded.
    pub fn reduce_mod_t(&self) -> Series {
        self.truncate_to(0)
    }

    /// Move to another truncation of the same DVR.
    pub fn retruncate(&self, spec: DvrSpec) -> Result<Series> {
        let ring = self.ring.with_spec(spec);
        let mut out = ring.zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.retruncate(spec)?)?;
        }
        Ok(out)
    }

    fn check_var(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.ring.e {
            return Err(Error::BadVariable(l));
        }
        Ok(())
    }

    /// Replace `x_l` by `repl`.
    ///
    /// The part of `repl` with unit coefficients must be a multiple of
    /// `x_l`, which keeps the substitution t-adically meaningful.
    pub fn substitute(&self, l: usize, repl: &Series) -> Result<Series> {
        self.check_var(l)?;
        self.check_ring(repl)?;
        let lin = XMonomial::var(self.ring.e, l);
        if let Some((m, _)) = repl.terms.iter().find(|(m, c)| c.is_unit() && **m != lin) {
            return Err(Error::NonConvergentSubstitution(format!(
                "replacement for x{l} has unit coefficient on {m}"
            )));
        }
        let mut by_power: BTreeMap<u32, Series> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.exp(l);
            let mut rest = m.clone();
            rest.0[l - 1] = 0;
            by_power.entry(k).or_insert_with(|| self.ring.zero()).add_term(rest, c.clone())?;
        }
        let mut out = self.ring.zero();
        let mut power = self.ring.one();
        let mut at = 0;
        for (k, part) in by_power {
            while at < k {
                power = power.mul(repl)?;
                at += 1;
            }
            out = out.add(&part.mul(&power)?)?;
        }
        Ok(out)
    }

    /// Inverse of `x_l -> x_l + shift`: returns `r` with
    /// `(x_l + shift)(x_l <- r) = x_l` modulo `t^{N+1}`.
    pub fn invert_substitution(l: usize, shift: &Series) -> Result<Series> {
        shift.check_var(l)?;
        if shift.min_t_degree() < 1 {
            return Err(Error::NonConvergentSubstitution(
                "shift must vanish modulo t".into(),
            ));
        }
        let x = shift.ring.var(l);
        let mut r = x.clone();
        for _ in 0..=shift.ring.spec.n() {
            r = x.sub(&shift.substitute(l, &r)?)?;
        }
        let forward = x.add(shift)?;
        if forward.substitute(l, &r)? != x {
            return Err(Error::NonConvergentSubstitution(format!(
                "inverse of x{l} -> x{l} + ({shift}) did not stabilize"
            )));
        }
        Ok(r)
    }

    /// Value at a point after substituting `tau` for `t`.
    pub fn evaluate(&self, point: &[FieldElem], field: &Field, tau: &FieldElem) -> Result<FieldElem> {
        if point.len() != self.ring.e {
            return Err(Error::VariableMismatch { expected: self.ring.e, got: point.len() });
        }
        let mut acc = field.zero();
        for (m, c) in &self.terms {
            let mut v = c.specialize_t(field, tau)?;
            for (x, &k) in point.iter().zip(m.exps()) {
                if k > 0 {
                    v = field.mul(&v, &field.pow(x, k));
                }
            }
            acc = field.add(&acc, &v);
        }
        Ok(acc)
    }

    /// Coefficient-wise specialization, keeping monomials.
    pub fn specialize(&self, field: &Field, tau: &FieldElem) -> Result<Vec<(XMonomial, FieldElem)>> {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let v = c.specialize_t(field, tau)?;
            if !field.is_zero(&v) {
                out.push((m.clone(), v));
            }
        }
        Ok(out)
    }
}

fn fmt_coeff(c: &Scalar) -> (bool, Option<String>) {
    if c.spec().kind() == DvrKind::MixedChar {
        let v = c.adic_lift().expect("mixed characteristic");
        let neg = v.is_negative();
        let mag = v.abs();
        return (neg, (!mag.is_one()).then(|| mag.to_string()));
    }
    let terms = c.terms();
    if let [(k, q)] = terms.as_slice() {
        let neg = q.is_negative();
        let mag = q.abs();
        let num = if mag.is_integer() {
            mag.numer().to_string()
        } else {
            format!("{}/{}", mag.numer(), mag.denom())
        };
        let body = match (*k, mag.is_one()) {
            (0, true) => None,
            (0, false) => Some(num),
            (1, true) => Some("t".into()),
            (k, true) => Some(format!("t^{k}")),
            (1, false) => Some(format!("{num}*t")),
            (k, false) => Some(format!("{num}*t^{k}")),
        };
        return (neg, body);
    }
    (false, Some(format!("({c})")))
}

impl fmt::Display for Series {
    /// Highest graded-lex monomial first; round-trips through
    /// [`SeriesRing::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let (neg, body) = fmt_coeff(c);
            match (idx, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            match (body, m.is_one()) {
                (None, true) => write!(f, "1")?,
                (None, false) => write!(f, "{m}")?,
                (Some(b), true) => write!(f, "{b}")?,
                (Some(b), false) => write!(f, "{b}*{m}")?,
            }
        }
        Ok(())
    }
}
