//! Chains `(a_2, ..., a_{e-1})`, their Hirzebruch–Jung invariants, the
//! binomial generators `g_{i,j}` and the relations between them.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parse::parse_chain;
use crate::series::{Series, SeriesRing, XMonomial};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chain {
    a: Vec<u32>,
}

impl Chain {
    /// Any chain, reduced or not.
    pub fn new(a: Vec<u32>) -> Self {
        Chain { a }
    }

    /// A chain whose entries are all at least 2.
    pub fn reduced(a: Vec<u32>) -> Result<Self> {
        let c = Chain { a };
        c.ensure_reduced()?;
        Ok(c)
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(Chain::new(parse_chain(s)?))
    }

    /// Embedding dimension.
    pub fn e(&self) -> usize {
        self.a.len() + 2
    }

    /// `a_i` for `2 <= i <= e - 1`.
    pub fn a(&self, i: usize) -> u32 {
        self.a[i - 2]
    }

    pub fn entries(&self) -> &[u32] {
        &self.a
    }

    pub fn is_reduced(&self) -> bool {
        self.a.iter().all(|&x| x >= 2)
    }

    pub fn ensure_reduced(&self) -> Result<()> {
        if self.is_reduced() {
            Ok(())
        } else {
            Err(Error::NonReducedChain(self.a.clone()))
        }
    }

    pub fn max_entry(&self) -> u32 {
        self.a.iter().copied().max().unwrap_or(0)
    }

    /// Default total-degree cap `2 * max(a) * e`.
    pub fn default_cap(&self) -> u32 {
        2 * self.max_entry().max(2) * self.e() as u32
    }

    /// All pairs `(i, j)` with `1 <= i`, `j <= e`, `j >= i + 2`, ordered by
    /// spread and then by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let e = self.e();
        let mut out = Vec::new();
        for spread in 2..e {
            for i in 1..=e - spread {
                out.push((i, i + spread));
            }
        }
        out
    }

    /// The binomial term `m` with `g_{i,j} = x_i x_j - m`.
    pub fn middle_monomial(&self, i: usize, j: usize) -> XMonomial {
        debug_assert!(j >= i + 2 && j <= self.e());
        let e = self.e();
        let mut exps = vec![0u32; e];
        if j == i + 2 {
            exps[i] = self.a(i + 1);
        } else {
            exps[i] = self.a(i + 1) - 1;
            for k in i + 2..=j - 2 {
                exps[k - 1] = self.a(k) - 2;
            }
            exps[j - 2] = self.a(j - 1) - 1;
        }
        XMonomial::from_exps(exps)
    }

    /// `x_i x_j`.
    pub fn leading_monomial(&self, i: usize, j: usize) -> XMonomial {
        XMonomial::var(self.e(), i).mul(&XMonomial::var(self.e(), j))
    }

    /// `g_{i,j}` as a series in `ring`.
    pub fn generator(&self, ring: &SeriesRing, i: usize, j: usize) -> Result<Series> {
        let one = crate::scalars::Scalar::one(ring.spec());
        let mut g = ring.zero();
        g.add_term(self.leading_monomial(i, j), one.clone())?;
        g.add_term(self.middle_monomial(i, j), -&one)?;
        Ok(g)
    }

    /// One template per pair, in [`Chain::pairs`] order.
    pub fn generators(&self, ring: &SeriesRing) -> Result<Vec<GeneratorTemplate>> {
        self.ensure_reduced()?;
        self.pairs()
            .into_iter()
            .map(|(i, j)| Ok(GeneratorTemplate { i, j, body: self.generator(ring, i, j)? }))
            .collect()
    }

    /// Both families of relations for every admissible triple.
    pub fn syzygies(&self) -> Vec<Syzygy> {
        let e = self.e();
        let mut out = Vec::new();
        for i in 1..=e {
            for j in i + 1..=e {
                for k in j + 1..=e {
                    if j + 1 < k {
                        out.push(self.syzygy(SyzygyKind::Right, i, j, k));
                    }
                    if i + 1 < j {
                        out.push(self.syzygy(SyzygyKind::Left, i, j, k));
                    }
                }
            }
        }
        out
    }

    /// `x_j g_{ik} - x_i g_{jk} - M g_{i,j+1}` (right) or
    /// `x_j g_{ik} - x_k g_{ij} - M g_{j-1,k}` (left).
    pub fn syzygy(&self, kind: SyzygyKind, i: usize, j: usize, k: usize) -> Syzygy {
        let e = self.e();
        let mut m = vec![0u32; e];
        let terms = match kind {
            SyzygyKind::Right => {
                for l in j + 1..=k - 2 {
                    m[l - 1] = self.a(l) - 2;
                }
                m[k - 2] += self.a(k - 1) - 1;
                vec![
                    (1, XMonomial::var(e, j), (i, k)),
                    (-1, XMonomial::var(e, i), (j, k)),
                    (-1, XMonomial::from_exps(m), (i, j + 1)),
                ]
            }
            SyzygyKind::Left => {
                m[i] = self.a(i + 1) - 1;
                for l in i + 2..=j - 1 {
                    m[l - 1] += self.a(l) - 2;
                }
                vec![
                    (1, XMonomial::var(e, j), (i, k)),
                    (-1, XMonomial::var(e, k), (i, j)),
                    (-1, XMonomial::from_exps(m), (j - 1, k)),
                ]
            }
        };
        Syzygy { kind, triple: (i, j, k), terms }
    }

    /// Expand every relation on the templates and report the first one that
    /// is not an identity.
    pub fn verify_syzygies(&self, ring: &SeriesRing) -> Result<SyzygyReport> {
        self.ensure_reduced()?;
        let mut checked = 0;
        for s in self.syzygies() {
            let value = s.evaluate(|i, j| self.generator(ring, i, j))?;
            checked += 1;
            if !value.is_zero() {
                return Ok(SyzygyReport { checked, failure: Some((s.kind, s.triple)) });
            }
        }
        Ok(SyzygyReport { checked, failure: None })
    }

    /// `b_i <= a_{i+l}` for every entry of `b` (entries are aligned so that
    /// `b[0]` is compared with `a[l]`).
    pub fn sub_chain_dominates(b: &[u32], a: &[u32], l: usize) -> bool {
        l + b.len() <= a.len() && b.iter().zip(&a[l..]).all(|(x, y)| x <= y)
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, x) in self.a.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorTemplate {
    pub i: usize,
    pub j: usize,
    pub body: Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyzygyKind {
    /// `i < j < k - 1`, involving `g_{i,j+1}`.
    Right,
    /// `i + 1 < j < k`, involving `g_{j-1,k}`.
    Left,
}

/// A relation `sum sign * m * g_pair = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syzygy {
    pub kind: SyzygyKind,
    pub triple: (usize, usize, usize),
    pub terms: Vec<(i64, XMonomial, (usize, usize))>,
}

impl Syzygy {
    /// Evaluate on the generators returned by `g`.
    pub fn evaluate(&self, mut g: impl FnMut(usize, usize) -> Result<Series>) -> Result<Series> {
        let mut acc: Option<Series> = None;
        for (sign, m, (i, j)) in &self.terms {
            let gen = g(*i, *j)?;
            let c = crate::scalars::Scalar::from_i64(gen.spec(), *sign);
            let part = gen.mul_term(m, &c)?;
            acc = Some(match acc {
                None => part,
                Some(a) => a.add(&part)?,
            });
        }
        Ok(acc.expect("relations have three terms"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyzygyReport {
    pub checked: usize,
    pub failure: Option<(SyzygyKind, (usize, usize, usize))>,
}

impl SyzygyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Chain of the fraction `n/q` with `0 < q < n`, `gcd(n, q) = 1`.
pub fn hj_expand(n: u64, q: u64) -> Result<Chain> {
    if q == 0 || q >= n || n.gcd(&q) != 1 {
        return Err(Error::InvalidFraction { n, q });
    }
    let (mut n, mut q) = (n, q);
    let mut a = Vec::new();
    while q > 0 {
        let k = n.div_ceil(q);
        a.push(k as u32);
        (n, q) = (q, k * q - n);
    }
    Ok(Chain::new(a))
}

/// `(n, q)` with `n/q = a_2 - 1/(a_3 - ...)`; the empty chain gives `(1, 1)`.
pub fn hj_value(c: &Chain) -> Result<(u64, u64)> {
    c.ensure_reduced()?;
    if c.a.is_empty() {
        return Ok((1, 1));
    }
    let (mut num, mut den) = (1u64, 0u64);
    for &a in c.a.iter().rev() {
        let next = (a as u64)
            .checked_mul(num)
            .and_then(|x| x.checked_sub(den))
            .ok_or(Error::LatticeOverflow)?;
        (num, den) = (next, num);
    }
    Ok((num, den))
}

/// Outcome of removing 1-entries from a chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "chain")]
pub enum Reduced {
    Smooth,
    Singular(Chain),
}

/// Remove 1-entries, leftmost first.
pub fn reduce_chain(entries: &[i64]) -> Reduced {
    reduce_chain_with(entries, |ones| ones[0])
}

/// Remove 1-entries in the order chosen by `pick`, which receives the
/// positions of all current 1-entries and returns one of them.
pub fn reduce_chain_with(entries: &[i64], mut pick: impl FnMut(&[usize]) -> usize) -> Reduced {
    let mut a = entries.to_vec();
    loop {
        if a.is_empty() || a.iter().any(|&x| x <= 0) {
            return Reduced::Smooth;
        }
        let ones: Vec<usize> = (0..a.len()).filter(|&k| a[k] == 1).collect();
        if ones.is_empty() {
            return Reduced::Singular(Chain::new(a.iter().map(|&x| x as u32).collect()));
        }
        let k = pick(&ones);
        if k > 0 {
            a[k - 1] -= 1;
        }
        if k + 1 < a.len() {
            a[k + 1] -= 1;
        }
        a.remove(k);
    }
}
