//! Literal grammar shared by scalars, series, chains and job documents.
//!
//! ```text
//! expr    := sign? term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := number ('/' number)? | 't' ('^' int)? | 'x' int ('^' int)? | '(' expr ')'
//! chain   := '[' (int (',' int)*)? ']'
//! ```
//!
//! Expressions parse into a [`RawPoly`] with rational coefficients, which the
//! scalar and series layers then push into a concrete DVR.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 4096;
/// Largest variable index accepted in `xN`.
pub const MAX_VARIABLE: usize = 64;
/// Largest number of terms an expression may expand to.
pub const MAX_TERMS: usize = 20_000;
const MAX_DEPTH: usize = 64;

/// Key of a raw term: t-exponent and x-exponents (trailing zeros trimmed,
/// index 0 is `x1`).
pub type RawKey = (u32, Vec<u32>);

/// A polynomial in `t, x1, x2, ...` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawPoly {
    pub terms: BTreeMap<RawKey, BigRational>,
}

impl RawPoly {
    fn constant(c: BigRational) -> Self {
        let mut p = RawPoly::default();
        if !c.is_zero() {
            p.terms.insert((0, Vec::new()), c);
        }
        p
    }

    fn monomial(t: u32, x: Vec<u32>) -> Self {
        let mut p = RawPoly::default();
        p.terms.insert((t, trim(x)), BigRational::one());
        p
    }

    fn add_term(&mut self, key: RawKey, c: BigRational) {
        let slot = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn add(mut self, other: RawPoly, sign: bool) -> RawPoly {
        for (k, c) in other.terms {
            self.add_term(k, if sign { c } else { -c });
        }
        self
    }

    fn mul(&self, other: &RawPoly, pos: usize) -> Result<RawPoly> {
        if self.terms.len().saturating_mul(other.terms.len()) > MAX_TERMS * 8 {
            return Err(Error::parse(pos, "expression too large"));
        }
        let mut out = RawPoly::default();
        for ((ta, xa), ca) in &self.terms {
            for ((tb, xb), cb) in &other.terms {
                let t = ta + tb;
                let len = xa.len().max(xb.len());
                let mut x = vec![0u32; len];
                for (i, slot) in x.iter_mut().enumerate() {
                    *slot = xa.get(i).copied().unwrap_or(0) + xb.get(i).copied().unwrap_or(0);
                }
                if t > MAX_EXPONENT || x.iter().any(|&k| k > MAX_EXPONENT) {
                    return Err(Error::parse(pos, "exponent too large"));
                }
                out.add_term((t, x), ca * cb);
            }
        }
        if out.terms.len() > MAX_TERMS {
            return Err(Error::parse(pos, "expression too large"));
        }
        Ok(out)
    }

    /// Number of x-variables mentioned.
    pub fn max_variable(&self) -> usize {
        self.terms.keys().map(|(_, x)| x.len()).max().unwrap_or(0)
    }

    pub fn is_x_free(&self) -> bool {
        self.max_variable() == 0
    }
}

fn trim(mut x: Vec<u32>) -> Vec<u32> {
    while x.last() == Some(&0) {
        x.pop();
    }
    x
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser { src: s.as_bytes(), pos: 0, depth: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{}'", c as char)))
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(Error::parse(self.pos, format!("unexpected '{}'", c as char))),
        }
    }

    fn digits(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, "expected digits"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn small_int(&mut self, max: u64) -> Result<u64> {
        let start = self.pos;
        let d = self.digits()?;
        match d.parse::<u64>() {
            Ok(v) if v <= max => Ok(v),
            _ => Err(Error::parse(start, format!("integer out of range (max {max})"))),
        }
    }

    fn big_int(&mut self) -> Result<BigInt> {
        let d = self.digits()?;
        Ok(d.parse().expect("decimal digits"))
    }

    fn exponent(&mut self) -> Result<u32> {
        if self.eat(b'^') {
            Ok(self.small_int(MAX_EXPONENT as u64)? as u32)
        } else {
            Ok(1)
        }
    }

    fn rational(&mut self) -> Result<BigRational> {
        let num = self.big_int()?;
        if self.eat(b'/') {
            let at = self.pos;
            let den = self.big_int()?;
            if den.is_zero() {
                return Err(Error::parse(at, "zero denominator"));
            }
            Ok(BigRational::new(num, den))
        } else {
            Ok(BigRational::from_integer(num))
        }
    }

    fn expr(&mut self) -> Result<RawPoly> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Error::parse(self.pos, "nesting too deep"));
        }
        let mut sign = true;
        if self.eat(b'-') {
            sign = false;
        } else {
            self.eat(b'+');
        }
        let mut acc = RawPoly::default().add(self.term()?, sign);
        loop {
            let sign = if self.eat(b'+') {
                true
            } else if self.eat(b'-') {
                false
            } else {
                break;
            };
            acc = acc.add(self.term()?, sign);
            if acc.terms.len() > MAX_TERMS {
                return Err(Error::parse(self.pos, "expression too large"));
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<RawPoly> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let at = self.pos;
            let f = self.factor()?;
            acc = acc.mul(&f, at)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RawPoly> {
        match self.peek() {
            Some(b'0'..=b'9') => Ok(RawPoly::constant(self.rational()?)),
            Some(b't') => {
                self.pos += 1;
                let k = self.exponent()?;
                Ok(RawPoly::monomial(k, Vec::new()))
            }
            Some(b'x') => {
                self.pos += 1;
                let at = self.pos;
                let i = self.small_int(MAX_VARIABLE as u64)? as usize;
                if i == 0 {
                    return Err(Error::parse(at, "variables are numbered from x1"));
                }
                let k = self.exponent()?;
                let mut x = vec![0; i];
                x[i - 1] = k;
                Ok(RawPoly::monomial(0, x))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) => Err(Error::parse(self.pos, format!("unexpected '{}'", c as char))),
            None => Err(Error::parse(self.pos, "unexpected end of input")),
        }
    }
}

/// Parse a polynomial expression in `t` and `x1, x2, ...`.
pub fn parse_poly(s: &str) -> Result<RawPoly> {
    let mut p = Parser::new(s);
    let out = p.expr()?;
    p.finish()?;
    Ok(out)
}

/// Parse `a` or `a/b` with an optional leading sign.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let mut p = Parser::new(s);
    let neg = p.eat(b'-');
    let r = p.rational()?;
    p.finish()?;
    Ok(if neg { -r } else { r })
}

/// Parse `n/q` with positive integers.
pub fn parse_fraction(s: &str) -> Result<(u64, u64)> {
    let mut p = Parser::new(s);
    let n = p.small_int(u64::MAX)?;
    p.expect(b'/')?;
    let q = p.small_int(u64::MAX)?;
    p.finish()?;
    Ok((n, q))
}

/// Parse a chain literal `[a2,...,a_{e-1}]`.
pub fn parse_chain(s: &str) -> Result<Vec<u32>> {
    let mut p = Parser::new(s);
    p.expect(b'[')?;
    let mut out = Vec::new();
    if !p.eat(b']') {
        loop {
            out.push(p.small_int(u32::MAX as u64)? as u32);
            if p.eat(b']') {
                break;
            }
            p.expect(b',')?;
        }
    }
    p.finish()?;
    Ok(out)
}
