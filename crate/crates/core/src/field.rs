//! Target fields for specialization: the rationals and small finite fields
//! `F_{p^m}`.
//!
//! Finite fields are table driven. Elements are encoded as integers in
//! `0..p^m` whose base-`p` digits are the coefficients of a polynomial modulo
//! a fixed monic irreducible of degree `m` (digit `k` is the coefficient of
//! `z^k`). The prime subfield is therefore `0..p`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest finite field we are willing to tabulate.
pub const MAX_FIELD_SIZE: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Rationals,
    Finite { p: u64, m: u32 },
}

impl FieldSpec {
    pub fn prime(p: u64) -> Self {
        FieldSpec::Finite { p, m: 1 }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Rationals => 0,
            FieldSpec::Finite { p, .. } => *p,
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::Finite { p, m: 1 } => write!(f, "F_{p}"),
            FieldSpec::Finite { p, m } => write!(f, "F_{p}^{m}"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug)]
pub struct FiniteField {
    p: u64,
    m: u32,
    size: u32,
    modulus: Vec<u64>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl FiniteField {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidField("extension degree must be positive".into()));
        }
        let size = p
            .checked_pow(m)
            .filter(|&s| s <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::InvalidField(format!("F_{p}^{m} is too large")))?;
        let modulus = find_irreducible(p, m as usize);
        let size32 = size as u32;
        let digits = |x: u32| -> Vec<u64> {
            let mut v = Vec::with_capacity(m as usize);
            let mut x = x as u64;
            for _ in 0..m {
                v.push(x % p);
                x /= p;
            }
            v
        };
        let encode = |v: &[u64]| -> u32 {
            let mut x = 0u64;
            for &d in v.iter().rev() {
                x = x * p + d;
            }
            x as u32
        };
        let n = size as usize;
        let mut add = vec![0u32; n * n];
        let mut mul = vec![0u32; n * n];
        let mut neg = vec![0u32; n];
        for a in 0..size32 {
            let da = digits(a);
            neg[a as usize] = encode(&da.iter().map(|&d| (p - d) % p).collect::<Vec<_>>());
            for b in 0..size32 {
                let db = digits(b);
                let s: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * n + b as usize] = encode(&s);
                mul[a as usize * n + b as usize] = encode(&poly_mulmod(&da, &db, &modulus, p));
            }
        }
        let mut inv = vec![0u32; n];
        for a in 1..size32 {
            for b in 1..size32 {
                if mul[a as usize * n + b as usize] == 1 {
                    inv[a as usize] = b;
                    break;
                }
            }
        }
        Ok(FiniteField { p, m, size: size32, modulus, add, mul, neg, inv })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.size as usize + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.size as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.inv[a as usize])
    }

    /// Image of an integer in the prime subfield.
    pub fn from_i64(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    pub fn from_bigint(&self, x: &BigInt) -> u32 {
        let r = x.mod_floor(&BigInt::from(self.p));
        r.to_u32().expect("residue fits")
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Human readable rendering: prime-field elements print as integers,
    /// extension elements as polynomials in `z`.
    pub fn render(&self, a: u32) -> String {
        if (a as u64) < self.p {
            return a.to_string();
        }
        let mut parts = Vec::new();
        let mut x = a as u64;
        for k in 0..self.m {
            let d = x % self.p;
            x /= self.p;
            if d == 0 {
                continue;
            }
            parts.push(match (k, d) {
                (0, d) => d.to_string(),
                (1, 1) => "z".to_string(),
                (1, d) => format!("{d}*z"),
                (k, 1) => format!("z^{k}"),
                (k, d) => format!("{d}*z^{k}"),
            });
        }
        parts.reverse();
        parts.join("+")
    }
}

fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let m = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * m];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for k in (m..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        // modulus is monic: z^m = -(lower terms)
        for j in 0..m {
            let sub = c * modulus[j] % p;
            prod[k - m + j] = (prod[k - m + j] + p - sub) % p;
        }
        prod[k] = 0;
    }
    prod.truncate(m);
    prod
}

/// Smallest monic irreducible of degree `m` over `F_p` in lexicographic order
/// of its coefficient vector, so field encodings are reproducible.
fn find_irreducible(p: u64, m: usize) -> Vec<u64> {
    if m == 1 {
        return vec![0, 1];
    }
    let count = p.pow(m as u32);
    for code in 0..count {
        let mut f = Vec::with_capacity(m + 1);
        let mut x = code;
        for _ in 0..m {
            f.push(x % p);
            x /= p;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    for d in 1..=m / 2 {
        for code in 0..p.pow(d as u32) {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = code;
            for _ in 0..d {
                g.push(x % p);
                x /= p;
            }
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_rem(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        if c != 0 {
            for (j, &gj) in g.iter().enumerate() {
                r[shift + j] = (r[shift + j] + p - c * gj % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// A concrete field instance: either `Q` or a tabulated finite field.
#[derive(Debug, Clone)]
pub enum Field {
    Rationals,
    Finite(Arc<FiniteField>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldElem {
    Rational(BigRational),
    Finite(u32),
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        match spec {
            FieldSpec::Rationals => Ok(Field::Rationals),
            FieldSpec::Finite { p, m } => Ok(Field::Finite(Arc::new(FiniteField::new(p, m)?))),
        }
    }

    pub fn spec(&self) -> FieldSpec {
        match self {
            Field::Rationals => FieldSpec::Rationals,
            Field::Finite(ff) => FieldSpec::Finite { p: ff.p, m: ff.m },
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.spec().characteristic()
    }

    pub fn finite(&self) -> Option<&FiniteField> {
        match self {
            Field::Finite(ff) => Some(ff),
            Field::Rationals => None,
        }
    }

    pub fn zero(&self) -> FieldElem {
        match self {
            Field::Rationals => FieldElem::Rational(BigRational::zero()),
            Field::Finite(_) => FieldElem::Finite(0),
        }
    }

    pub fn one(&self) -> FieldElem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, x: i64) -> FieldElem {
        match self {
            Field::Rationals => FieldElem::Rational(BigRational::from_integer(x.into())),
            Field::Finite(ff) => FieldElem::Finite(ff.from_i64(x)),
        }
    }

    pub fn from_bigint(&self, x: &BigInt) -> FieldElem {
        match self {
            Field::Rationals => FieldElem::Rational(BigRational::from_integer(x.clone())),
            Field::Finite(ff) => FieldElem::Finite(ff.from_bigint(x)),
        }
    }

    pub fn from_rational(&self, x: &BigRational) -> Result<FieldElem> {
        match self {
            Field::Rationals => Ok(FieldElem::Rational(x.clone())),
            Field::Finite(ff) => {
                let den = ff.from_bigint(x.denom());
                let inv = ff.inv(den).ok_or(Error::DenominatorCollision(ff.p))?;
                Ok(FieldElem::Finite(ff.mul(ff.from_bigint(x.numer()), inv)))
            }
        }
    }

    /// Element of a finite field given by its table index.
    pub fn elem(&self, index: u32) -> FieldElem {
        match self {
            Field::Rationals => FieldElem::Rational(BigRational::from_integer(index.into())),
            Field::Finite(_) => FieldElem::Finite(index),
        }
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        match (self, a, b) {
            (Field::Rationals, FieldElem::Rational(x), FieldElem::Rational(y)) => {
                FieldElem::Rational(x + y)
            }
            (Field::Finite(ff), FieldElem::Finite(x), FieldElem::Finite(y)) => {
                FieldElem::Finite(ff.add(*x, *y))
            }
            _ => panic!("field element does not belong to {}", self.spec()),
        }
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        match (self, a) {
            (Field::Rationals, FieldElem::Rational(x)) => FieldElem::Rational(-x),
            (Field::Finite(ff), FieldElem::Finite(x)) => FieldElem::Finite(ff.neg(*x)),
            _ => panic!("field element does not belong to {}", self.spec()),
        }
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        match (self, a, b) {
            (Field::Rationals, FieldElem::Rational(x), FieldElem::Rational(y)) => {
                FieldElem::Rational(x * y)
            }
            (Field::Finite(ff), FieldElem::Finite(x), FieldElem::Finite(y)) => {
                FieldElem::Finite(ff.mul(*x, *y))
            }
            _ => panic!("field element does not belong to {}", self.spec()),
        }
    }

    pub fn inv(&self, a: &FieldElem) -> Option<FieldElem> {
        match (self, a) {
            (Field::Rationals, FieldElem::Rational(x)) => {
                (!x.is_zero()).then(|| FieldElem::Rational(x.recip()))
            }
            (Field::Finite(ff), FieldElem::Finite(x)) => ff.inv(*x).map(FieldElem::Finite),
            _ => panic!("field element does not belong to {}", self.spec()),
        }
    }

    pub fn pow(&self, a: &FieldElem, exp: u32) -> FieldElem {
        match (self, a) {
            (Field::Finite(ff), FieldElem::Finite(x)) => FieldElem::Finite(ff.pow(*x, exp as u64)),
            (Field::Rationals, FieldElem::Rational(x)) => {
                FieldElem::Rational(num_traits::pow::pow(x.clone(), exp as usize))
            }
            _ => panic!("field element does not belong to {}", self.spec()),
        }
    }

    pub fn is_zero(&self, a: &FieldElem) -> bool {
        match a {
            FieldElem::Rational(x) => x.is_zero(),
            FieldElem::Finite(x) => *x == 0,
        }
    }

    pub fn render(&self, a: &FieldElem) -> String {
        match (self, a) {
            (_, FieldElem::Rational(x)) => {
                if x.is_integer() {
                    x.numer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
            (Field::Finite(ff), FieldElem::Finite(x)) => ff.render(*x),
            (Field::Rationals, FieldElem::Finite(x)) => x.to_string(),
        }
    }

    /// Rendering accepted back by [`Field::parse_elem`]: extension elements
    /// are written by table index.
    pub fn encode(&self, a: &FieldElem) -> String {
        match (self, a) {
            (Field::Finite(ff), FieldElem::Finite(x)) if ff.m > 1 && (*x as u64) >= ff.p => format!("#{x}"),
            _ => self.render(a),
        }
    }

    /// Parse a field element: an integer (or `a/b` over `Q`), or for an
    /// extension field a raw table index written `#k`.
    pub fn parse_elem(&self, s: &str) -> Result<FieldElem> {
        let s = s.trim();
        if let Some(idx) = s.strip_prefix('#') {
            let k: u32 = idx.parse().map_err(|_| Error::parse(0, format!("bad index {s:?}")))?;
            return match self {
                Field::Finite(ff) if k < ff.size => Ok(FieldElem::Finite(k)),
                _ => Err(Error::parse(0, format!("index {s:?} outside the field"))),
            };
        }
        let q = crate::parse::parse_rational(s)?;
        self.from_rational(&q)
    }
}

impl FieldElem {
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElem::Rational(x) => Some(x),
            FieldElem::Finite(_) => None,
        }
    }
}

/// Symmetric representative of `v` modulo `modulus`, in `(-modulus/2, modulus/2]`.
pub fn symmetric_lift(v: u64, modulus: u64) -> BigInt {
    let v = BigInt::from(v);
    let m = BigInt::from(modulus);
    if &v * 2 > m {
        v - m
    } else {
        v
    }
}
