//! Exact arithmetic in the truncated complete DVR `S` with uniformizer `t`.
//!
//! Three models are supported:
//!
//! * equal characteristic zero, `Q[t]/(t^{N+1})`, exact rational coefficients;
//! * equal characteristic `p`, `F_p[t]/(t^{N+1})`;
//! * mixed characteristic, `Z/p^{N+1}` with `t = p`.
//!
//! Every [`Scalar`] carries its [`DvrSpec`]. Combining scalars from different
//! specs panics in the operator impls; the `Series` layer checks specs up
//! front and reports [`Error::SpecMismatch`] instead.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{is_prime, symmetric_lift, Field, FieldElem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DvrKind {
    EqualCharZero,
    EqualCharP,
    MixedChar,
}

impl DvrKind {
    pub fn name(&self) -> &'static str {
        match self {
            DvrKind::EqualCharZero => "equal-char-0",
            DvrKind::EqualCharP => "equal-char-p",
            DvrKind::MixedChar => "mixed-char",
        }
    }
}

/// Which DVR we work over and where it is truncated: t-degrees `0..=N` are
/// retained and `t^{N+1} = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DvrDoc", into = "DvrDoc")]
pub struct DvrSpec {
    kind: DvrKind,
    p: u64,
    n: u32,
    modulus: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DvrDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<u64>,
    truncation: u32,
}

impl TryFrom<DvrDoc> for DvrSpec {
    type Error = Error;

    fn try_from(doc: DvrDoc) -> Result<Self> {
        match (doc.kind.as_str(), doc.p) {
            ("equal-char-0", None) => DvrSpec::equal_char_zero(doc.truncation),
            ("equal-char-p", Some(p)) => DvrSpec::equal_char_p(p, doc.truncation),
            ("mixed-char", Some(p)) => DvrSpec::mixed_char(p, doc.truncation),
            ("equal-char-0", Some(_)) => {
                Err(Error::InvalidDvr("equal-char-0 takes no prime".into()))
            }
            (k, _) => Err(Error::InvalidDvr(format!("unknown kind {k:?} or missing prime"))),
        }
    }
}

impl From<DvrSpec> for DvrDoc {
    fn from(s: DvrSpec) -> Self {
        DvrDoc {
            kind: s.kind.name().to_string(),
            p: (s.kind != DvrKind::EqualCharZero).then_some(s.p),
            truncation: s.n,
        }
    }
}

impl DvrSpec {
    /// Value taken by the uniformizer when specializing to `field` at `tau`:
    /// `p` in mixed characteristic, `tau` otherwise.
    pub fn t_value(&self, field: &Field, tau: &FieldElem) -> FieldElem {
        match self.kind {
            DvrKind::MixedChar => field.from_i64(self.p as i64),
            _ => tau.clone(),
        }
    }

    pub fn equal_char_zero(n: u32) -> Result<Self> {
        Self::check_n(n)?;
        Ok(DvrSpec { kind: DvrKind::EqualCharZero, p: 0, n, modulus: 0 })
    }

    pub fn equal_char_p(p: u64, n: u32) -> Result<Self> {
        Self::check_n(n)?;
        if !is_prime(p) || p >= 1 << 31 {
            return Err(Error::InvalidDvr(format!("{p} is not a usable prime")));
        }
        Ok(DvrSpec { kind: DvrKind::EqualCharP, p, n, modulus: p })
    }

    pub fn mixed_char(p: u64, n: u32) -> Result<Self> {
        Self::check_n(n)?;
        if !is_prime(p) {
            return Err(Error::InvalidDvr(format!("{p} is not prime")));
        }
        let modulus = p
            .checked_pow(n + 1)
            .filter(|&m| m < 1 << 62)
            .ok_or_else(|| Error::InvalidDvr(format!("{p}^{} does not fit in 62 bits", n + 1)))?;
        Ok(DvrSpec { kind: DvrKind::MixedChar, p, n, modulus })
    }

    fn check_n(n: u32) -> Result<()> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidDvr(format!("truncation order {n} outside 1..=64")));
        }
        Ok(())
    }

    pub fn kind(&self) -> DvrKind {
        self.kind
    }

    /// Residue characteristic (0 for equal characteristic zero).
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Truncation order `N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `p^{N+1}` in mixed characteristic.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Same ring, different truncation.
    pub fn with_truncation(&self, n: u32) -> Result<Self> {
        match self.kind {
            DvrKind::EqualCharZero => Self::equal_char_zero(n),
            DvrKind::EqualCharP => Self::equal_char_p(self.p, n),
            DvrKind::MixedChar => Self::mixed_char(self.p, n),
        }
    }
}

impl fmt::Display for DvrSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DvrKind::EqualCharZero => write!(f, "Q[t]/(t^{})", self.n + 1),
            DvrKind::EqualCharP => write!(f, "F_{}[t]/(t^{})", self.p, self.n + 1),
            DvrKind::MixedChar => write!(f, "Z/{}^{}", self.p, self.n + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Dense t-coefficients, index = t-degree.
    Rational(Vec<BigRational>),
    Modular(Vec<u64>),
    /// Canonical representative in `[0, p^{N+1})`.
    Adic(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    spec: DvrSpec,
    repr: Repr,
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i128, m as i128);
    (g == 1).then(|| x.rem_euclid(m as i128) as u64)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn bigint_mod(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

impl Scalar {
    pub fn zero(spec: DvrSpec) -> Self {
        let len = spec.n as usize + 1;
        let repr = match spec.kind {
            DvrKind::EqualCharZero => Repr::Rational(vec![BigRational::zero(); len]),
            DvrKind::EqualCharP => Repr::Modular(vec![0; len]),
            DvrKind::MixedChar => Repr::Adic(0),
        };
        Scalar { spec, repr }
    }

    pub fn one(spec: DvrSpec) -> Self {
        Self::from_i64(spec, 1)
    }

    pub fn from_i64(spec: DvrSpec, x: i64) -> Self {
        Self::from_bigint(spec, &BigInt::from(x))
    }

    pub fn from_bigint(spec: DvrSpec, x: &BigInt) -> Self {
        let mut s = Self::zero(spec);
        match &mut s.repr {
            Repr::Rational(c) => c[0] = BigRational::from_integer(x.clone()),
            Repr::Modular(c) => c[0] = bigint_mod(x, spec.p),
            Repr::Adic(v) => *v = bigint_mod(x, spec.modulus),
        }
        s
    }

    /// Image of a rational number. Denominators must be units of `S`.
    pub fn from_rational(spec: DvrSpec, x: &BigRational) -> Result<Self> {
        match spec.kind {
            DvrKind::EqualCharZero => {
                let mut s = Self::zero(spec);
                if let Repr::Rational(c) = &mut s.repr {
                    c[0] = x.clone();
                }
                Ok(s)
            }
            DvrKind::EqualCharP | DvrKind::MixedChar => {
                let m = if spec.kind == DvrKind::MixedChar { spec.modulus } else { spec.p };
                let den = bigint_mod(x.denom(), m);
                let inv = mod_inverse(den, m).ok_or(Error::DenominatorCollision(spec.p))?;
                let num = bigint_mod(x.numer(), m);
                let v = mulmod(num, inv, m);
                Ok(Self::from_bigint(spec, &BigInt::from(v)))
            }
        }
    }

    /// Parse a scalar literal such as `3/2*t^2 + 1`. In mixed
    /// characteristic `t` denotes `p`, so plain integers are the usual form.
    pub fn parse(spec: DvrSpec, s: &str) -> Result<Self> {
        let raw = crate::parse::parse_poly(s)?;
        if !raw.is_x_free() {
            return Err(Error::parse(0, "scalar literal mentions an x variable"));
        }
        let mut acc = Self::zero(spec);
        for ((k, _), c) in &raw.terms {
            acc = &acc + &Self::term(spec, c, *k)?;
        }
        Ok(acc)
    }

    /// `coeff * t^k`; zero when `k > N`.
    pub fn term(spec: DvrSpec, coeff: &BigRational, k: u32) -> Result<Self> {
        Ok(Self::from_rational(spec, coeff)?.mul_t_pow(k))
    }

    /// The uniformizer `t` (equal to `p` in mixed characteristic).
    pub fn t(spec: DvrSpec) -> Self {
        Self::one(spec).mul_t_pow(1)
    }

    pub fn spec(&self) -> DvrSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rational(c) => c.iter().all(Zero::is_zero),
            Repr::Modular(c) => c.iter().all(|&x| x == 0),
            Repr::Adic(v) => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one(self.spec)
    }

    /// t-adic valuation; `N + 1` for zero.
    pub fn valuation(&self) -> u32 {
        let n1 = self.spec.n + 1;
        match &self.repr {
            Repr::Rational(c) => c.iter().position(|x| !x.is_zero()).map_or(n1, |k| k as u32),
            Repr::Modular(c) => c.iter().position(|&x| x != 0).map_or(n1, |k| k as u32),
            Repr::Adic(v) => {
                if *v == 0 {
                    return n1;
                }
                let mut v = *v;
                let mut k = 0;
                while v % self.spec.p == 0 {
                    v /= self.spec.p;
                    k += 1;
                }
                k
            }
        }
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == 0
    }

    fn assert_same(&self, other: &Scalar) {
        assert!(
            self.spec == other.spec,
            "scalar spec mismatch: {} vs {}",
            self.spec,
            other.spec
        );
    }

    pub fn ensure_same(&self, other: &Scalar) -> Result<()> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::SpecMismatch(self.spec, other.spec))
        }
    }

    /// Multiply by `t^k`, dropping everything beyond `t^N`.
    pub fn mul_t_pow(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        let len = self.spec.n as usize + 1;
        let k = k as usize;
        let repr = match &self.repr {
            Repr::Rational(c) => {
                let mut out = vec![BigRational::zero(); len];
                for i in 0..len.saturating_sub(k) {
                    out[i + k] = c[i].clone();
                }
                Repr::Rational(out)
            }
            Repr::Modular(c) => {
                let mut out = vec![0; len];
                for i in 0..len.saturating_sub(k) {
                    out[i + k] = c[i];
                }
                Repr::Modular(out)
            }
            Repr::Adic(v) => {
                if k >= len {
                    Repr::Adic(0)
                } else {
                    let f = self.spec.p.pow(k as u32);
                    Repr::Adic(mulmod(*v, f, self.spec.modulus))
                }
            }
        };
        Scalar { spec: self.spec, repr }
    }

    /// Exact division by `t`; requires positive valuation. The top
    /// coefficient of the quotient is unknown and set to zero; in mixed
    /// characteristic the symmetric representative is divided, so small
    /// negative integers stay small.
    pub fn div_t(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        if self.valuation() == 0 {
            return Err(Error::NotDivisibleByT);
        }
        let len = self.spec.n as usize + 1;
        let repr = match &self.repr {
            Repr::Rational(c) => {
                let mut out = vec![BigRational::zero(); len];
                out[..len - 1].clone_from_slice(&c[1..]);
                Repr::Rational(out)
            }
            Repr::Modular(c) => {
                let mut out = vec![0; len];
                out[..len - 1].copy_from_slice(&c[1..]);
                Repr::Modular(out)
            }
            Repr::Adic(v) => {
                let q = symmetric_lift(*v, self.spec.modulus) / BigInt::from(self.spec.p);
                Repr::Adic(bigint_mod(&q, self.spec.modulus))
            }
        };
        Ok(Scalar { spec: self.spec, repr })
    }

    /// Keep only t-degrees `<= m`.
    pub fn truncate_to(&self, m: u32) -> Self {
        if m >= self.spec.n {
            return self.clone();
        }
        let keep = m as usize + 1;
        let repr = match &self.repr {
            Repr::Rational(c) => Repr::Rational(
                c.iter()
                    .enumerate()
                    .map(|(i, x)| if i < keep { x.clone() } else { BigRational::zero() })
                    .collect(),
            ),
            Repr::Modular(c) => Repr::Modular(
                c.iter().enumerate().map(|(i, &x)| if i < keep { x } else { 0 }).collect(),
            ),
            Repr::Adic(v) => Repr::Adic(v % self.spec.p.pow(m + 1)),
        };
        Scalar { spec: self.spec, repr }
    }

    /// Re-embed into a spec of the same kind with a different truncation.
    pub fn retruncate(&self, spec: DvrSpec) -> Result<Self> {
        if spec.kind != self.spec.kind || spec.p != self.spec.p {
            return Err(Error::SpecMismatch(self.spec, spec));
        }
        let len = spec.n as usize + 1;
        let repr = match &self.repr {
            Repr::Rational(c) => {
                let mut out = vec![BigRational::zero(); len];
                for (i, x) in c.iter().enumerate().take(len) {
                    out[i] = x.clone();
                }
                Repr::Rational(out)
            }
            Repr::Modular(c) => {
                let mut out = vec![0; len];
                for (i, &x) in c.iter().enumerate().take(len) {
                    out[i] = x;
                }
                Repr::Modular(out)
            }
            Repr::Adic(v) if spec.modulus <= self.spec.modulus => Repr::Adic(v % spec.modulus),
            Repr::Adic(v) => {
                Repr::Adic(bigint_mod(&symmetric_lift(*v, self.spec.modulus), spec.modulus))
            }
        };
        Ok(Scalar { spec, repr })
    }

    pub fn invert_unit(&self) -> Result<Self> {
        let v = self.valuation();
        if v != 0 {
            return Err(Error::NotAUnit(v));
        }
        let len = self.spec.n as usize + 1;
        let repr = match &self.repr {
            Repr::Rational(a) => {
                let a0 = a[0].recip();
                let mut b = vec![BigRational::zero(); len];
                b[0] = a0.clone();
                for k in 1..len {
                    let mut acc = BigRational::zero();
                    for j in 1..=k {
                        if !a[j].is_zero() {
                            acc += &a[j] * &b[k - j];
                        }
                    }
                    b[k] = -(acc * &a0);
                }
                Repr::Rational(b)
            }
            Repr::Modular(a) => {
                let p = self.spec.p;
                let a0 = mod_inverse(a[0], p).expect("nonzero residue");
                let mut b = vec![0u64; len];
                b[0] = a0;
                for k in 1..len {
                    let mut acc = 0u64;
                    for j in 1..=k {
                        acc = (acc + mulmod(a[j], b[k - j], p)) % p;
                    }
                    b[k] = mulmod((p - acc) % p, a0, p);
                }
                Repr::Modular(b)
            }
            Repr::Adic(x) => {
                Repr::Adic(mod_inverse(*x, self.spec.modulus).expect("unit modulo p^(N+1)"))
            }
        };
        Ok(Scalar { spec: self.spec, repr })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Scalar::one(self.spec);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Residue modulo `t`, as a rational (characteristic zero) or as an
    /// integer in `[0, p)`.
    pub fn residue(&self) -> BigRational {
        match &self.repr {
            Repr::Rational(c) => c[0].clone(),
            Repr::Modular(c) => BigRational::from_integer(c[0].into()),
            Repr::Adic(v) => BigRational::from_integer((v % self.spec.p).into()),
        }
    }

    /// `(t-degree, coefficient)` pairs of the nonzero terms. In mixed
    /// characteristic the coefficients are the base-`p` digits.
    pub fn terms(&self) -> Vec<(u32, BigRational)> {
        match &self.repr {
            Repr::Rational(c) => c
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(k, x)| (k as u32, x.clone()))
                .collect(),
            Repr::Modular(c) => c
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(k, &x)| (k as u32, BigRational::from_integer(x.into())))
                .collect(),
            Repr::Adic(v) => {
                let mut out = Vec::new();
                let mut v = *v;
                let mut k = 0;
                while v > 0 {
                    let d = v % self.spec.p;
                    if d != 0 {
                        out.push((k, BigRational::from_integer(d.into())));
                    }
                    v /= self.spec.p;
                    k += 1;
                }
                out
            }
        }
    }

    /// Highest t-degree carrying a nonzero coefficient (`None` for zero).
    pub fn t_degree(&self) -> Option<u32> {
        self.terms().last().map(|(k, _)| *k)
    }

    /// Integer representative in mixed characteristic, symmetric around 0.
    pub fn adic_lift(&self) -> Option<BigInt> {
        match &self.repr {
            Repr::Adic(v) => Some(symmetric_lift(*v, self.spec.modulus)),
            _ => None,
        }
    }

    /// Substitute a nonzero field value for `t`.
    ///
    /// Mixed characteristic elements are read as integers through their
    /// symmetric representative, so `t = p` is already built in and `tau`
    /// is ignored; the target must then have characteristic other than `p`.
    pub fn specialize_t(&self, field: &Field, tau: &FieldElem) -> Result<FieldElem> {
        match &self.repr {
            Repr::Rational(c) => {
                let mut acc = field.zero();
                let mut pw = field.one();
                for x in c {
                    if !x.is_zero() {
                        acc = field.add(&acc, &field.mul(&field.from_rational(x)?, &pw));
                    }
                    pw = field.mul(&pw, tau);
                }
                Ok(acc)
            }
            Repr::Modular(c) => {
                if field.characteristic() != self.spec.p {
                    return Err(Error::BadSpecialization(format!(
                        "{} does not specialize into characteristic {}",
                        self.spec,
                        field.characteristic()
                    )));
                }
                let mut acc = field.zero();
                let mut pw = field.one();
                for &x in c {
                    if x != 0 {
                        acc = field.add(&acc, &field.mul(&field.from_i64(x as i64), &pw));
                    }
                    pw = field.mul(&pw, tau);
                }
                Ok(acc)
            }
            Repr::Adic(v) => {
                if field.characteristic() == self.spec.p {
                    return Err(Error::BadSpecialization(format!(
                        "mixed characteristic {} reduced mod {} is the special fiber",
                        self.spec,
                        self.spec.p
                    )));
                }
                Ok(field.from_bigint(&symmetric_lift(*v, self.spec.modulus)))
            }
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;

    fn add(self, rhs: &Scalar) -> Scalar {
        self.assert_same(rhs);
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => {
                Repr::Rational(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Repr::Modular(a), Repr::Modular(b)) => {
                let p = self.spec.p;
                Repr::Modular(a.iter().zip(b).map(|(x, y)| (x + y) % p).collect())
            }
            (Repr::Adic(a), Repr::Adic(b)) => Repr::Adic(
                ((*a as u128 + *b as u128) % self.spec.modulus as u128) as u64,
            ),
            _ => unreachable!(),
        };
        Scalar { spec: self.spec, repr }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        let repr = match &self.repr {
            Repr::Rational(a) => Repr::Rational(a.iter().map(|x| -x).collect()),
            Repr::Modular(a) => {
                let p = self.spec.p;
                Repr::Modular(a.iter().map(|&x| (p - x) % p).collect())
            }
            Repr::Adic(a) => Repr::Adic((self.spec.modulus - a) % self.spec.modulus),
        };
        Scalar { spec: self.spec, repr }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;

    fn mul(self, rhs: &Scalar) -> Scalar {
        self.assert_same(rhs);
        let len = self.spec.n as usize + 1;
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => {
                let mut out = vec![BigRational::zero(); len];
                for (i, x) in a.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (j, y) in b.iter().enumerate().take(len - i) {
                        if !y.is_zero() {
                            out[i + j] += x * y;
                        }
                    }
                }
                Repr::Rational(out)
            }
            (Repr::Modular(a), Repr::Modular(b)) => {
                let p = self.spec.p;
                let mut out = vec![0u64; len];
                for (i, &x) in a.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in b.iter().enumerate().take(len - i) {
                        out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
                    }
                }
                Repr::Modular(out)
            }
            (Repr::Adic(a), Repr::Adic(b)) => Repr::Adic(mulmod(*a, *b, self.spec.modulus)),
            _ => unreachable!(),
        };
        Scalar { spec: self.spec, repr }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn fmt_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for Scalar {
    /// Equal characteristic: `3/2*t^2 + 1` (descending t-degree).
    /// Mixed characteristic: the canonical integer in `[0, p^{N+1})`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Repr::Adic(v) = &self.repr {
            return write!(f, "{v}");
        }
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let body = match *k {
                0 => fmt_rational(&mag),
                k => {
                    let tp = if k == 1 { "t".to_string() } else { format!("t^{k}") };
                    if mag.is_one() {
                        tp
                    } else {
                        format!("{}*{tp}", fmt_rational(&mag))
                    }
                }
            };
            write!(f, "{body}")?;
        }
        Ok(())
    }
}
