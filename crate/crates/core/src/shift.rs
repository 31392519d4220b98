//! Shifting automorphisms and the normal form they converge to:
//!
//! ```text
//! g'_{i-1,i+1} = x_{i-1}(x_{i+1} + t c_{i+1}) - x_i^{a_i} + t (x_i h_i(x_i) + k_i)
//! ```
//!
//! A right shift at `i` moves the `x_{i-1}`-divisible part of the tail of
//! `g'_{i-1,i+1}` into the coordinate `x_{i+1}`; a left shift moves the
//! `x_{i+1}`-divisible part into `x_{i-1}`. The constant `k_i` is carried
//! separately because no coordinate change can absorb it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::deform::{GeneratorSet, Pair};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};
use crate::scalars::Scalar;
use crate::series::{Series, XMonomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Right,
    Left,
}

/// Leading-order change a shift made to a neighboring generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct NeighborDelta {
    pub pair: Pair,
    pub order: u32,
    pub delta: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ShiftRecord {
    pub index: usize,
    pub direction: Direction,
    /// The substituted variable.
    pub variable: usize,
    /// `t h'`, the amount the variable was shifted by.
    pub shift: String,
    pub neighbors: Vec<NeighborDelta>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PassRecord {
    pub pass: usize,
    pub residual_before: u32,
    pub residual_after: u32,
    pub shifts: Vec<ShiftRecord>,
}

/// Coordinate change `x_variable -> image` carrying points of the old fiber
/// to points of the new one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMap {
    pub variable: usize,
    pub image: Series,
}

impl PointMap {
    pub fn apply(&self, point: &mut [FieldElem], field: &Field, tau: &FieldElem) -> Result<()> {
        let v = self.image.evaluate(point, field, tau)?;
        point[self.variable - 1] = v;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Shifted {
    pub generators: GeneratorSet,
    pub record: ShiftRecord,
    pub map: Option<PointMap>,
}

/// Monomials allowed in the tail of `g'_{i-1,i+1}` by the normal form:
/// `1`, `x_{i-1}` and `x_i^k` for `1 <= k <= a_i`.
pub fn is_shape_monomial(chain: &Chain, i: usize, m: &XMonomial) -> bool {
    if m.is_one() || *m == XMonomial::var(m.e(), i - 1) {
        return true;
    }
    m.is_pure_power_of(i) && m.exp(i) <= chain.a(i)
}

fn divide_by_var(s: &Series, l: usize) -> Result<Series> {
    let x = XMonomial::var(s.e(), l);
    let mut out = s.ring().zero();
    for (m, c) in s.terms() {
        out.add_term(m.div(&x).expect("multiple of the variable"), c.clone())?;
    }
    Ok(out)
}

/// One shifting automorphism at `i` (`2 <= i <= e - 1`).
pub fn shift_at(gs: &GeneratorSet, i: usize, direction: Direction) -> Result<Shifted> {
    let chain = gs.chain().clone();
    let e = gs.e();
    if i < 2 || i + 1 > e {
        return Err(Error::BadVariable(i));
    }
    let (divisor, target) = match direction {
        Direction::Right => (i - 1, i + 1),
        Direction::Left => (i + 1, i - 1),
    };
    let top = XMonomial::power(e, i, chain.a(i));
    let tail = gs.tail(i - 1, i + 1)?;
    let rep = gs.max_divisible_representative_except(&tail, divisor, |m| *m == top)?;
    let moved = rep.filter(|m, _| m.exp(divisor) > 0 && *m != top);
    let record = |shift: String, neighbors| ShiftRecord {
        index: i,
        direction,
        variable: target,
        shift,
        neighbors,
    };
    if moved.is_zero() {
        return Ok(Shifted { generators: gs.clone(), record: record("0".into(), Vec::new()), map: None });
    }
    let amount = divide_by_var(&moved, divisor)?;
    let mut staged = gs.clone();
    staged.set(i - 1, i + 1, gs.template(i - 1, i + 1)?.add(&rep)?)?;
    let inverse = Series::invert_substitution(target, &amount)?;
    let shifted = staged.substitute(target, &inverse)?.relift()?;

    let neighbors: Vec<Pair> = match direction {
        Direction::Right => vec![(i, i + 2), (i + 1, i + 3)],
        Direction::Left => [2, 3].iter().filter(|&&k| i > k).map(|k| (i - k, i + 2 - k)).collect(),
    };
    let mut deltas = Vec::new();
    for (p, q) in neighbors {
        if q > e {
            continue;
        }
        let before = gs.tail(p, q)?;
        let after = shifted.tail(p, q)?;
        let delta = after.sub(&before)?;
        if !delta.is_zero() {
            let order = delta.min_t_degree();
            deltas.push(NeighborDelta {
                pair: (p, q),
                order,
                delta: delta.truncate_to(order).to_string(),
            });
        }
    }
    let image = gs.ring().var(target).add(&amount)?;
    Ok(Shifted {
        generators: shifted,
        record: record(amount.to_string(), deltas),
        map: Some(PointMap { variable: target, image }),
    })
}

/// Shift at `2, 3, ..., e-1` (right) or `e-1, ..., 2` (left).
pub fn full_sweep(gs: &GeneratorSet, direction: Direction) -> Result<(GeneratorSet, Vec<ShiftRecord>, Vec<PointMap>)> {
    let e = gs.e();
    let order: Vec<usize> = match direction {
        Direction::Right => (2..e).collect(),
        Direction::Left => (2..e).rev().collect(),
    };
    let mut cur = gs.clone();
    let mut records = Vec::new();
    let mut maps = Vec::new();
    for i in order {
        let s = shift_at(&cur, i, direction)?;
        cur = s.generators;
        records.push(s.record);
        maps.extend(s.map);
    }
    Ok((cur, records, maps))
}

/// Smallest t-degree of a tail term of some `g'_{i-1,i+1}` outside the
/// normal-form shape; `N + 1` when every consecutive generator has the shape.
pub fn residual(gs: &GeneratorSet) -> Result<u32> {
    let chain = gs.chain();
    let mut best = gs.ring().spec().n() + 1;
    for i in 2..gs.e() {
        let tail = gs.compact(&gs.tail(i - 1, i + 1)?)?;
        let off = tail.filter(|m, _| !is_shape_monomial(chain, i, m));
        best = best.min(off.min_t_degree());
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct NormalizedDeformation {
    pub generators: GeneratorSet,
    /// `c_{i+1}` keyed by `i + 1` for `3 <= i + 1 <= e`.
    pub c: BTreeMap<usize, Scalar>,
    /// Coefficients of `h_i` in increasing `x_i`-degree, keyed by `i`.
    pub h: BTreeMap<usize, Vec<Scalar>>,
    /// Constant terms `k_i` keyed by `i`.
    pub kappa: BTreeMap<usize, Scalar>,
    /// Passes needed to reach the shape.
    pub passes: usize,
    /// Further passes until the data stopped changing.
    pub settling: usize,
    pub audit: Vec<PassRecord>,
    /// Coordinate changes from the input coordinates, in application order.
    pub maps: Vec<PointMap>,
}

impl NormalizedDeformation {
    pub fn chain(&self) -> &Chain {
        self.generators.chain()
    }

    pub fn e(&self) -> usize {
        self.generators.e()
    }

    /// `c_j` with the convention `c_1 = c_2 = 0`.
    pub fn c_at(&self, j: usize) -> Scalar {
        self.c
            .get(&j)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.generators.ring().spec()))
    }

    /// The `t`-part of `g'_{i-1,i+1}` beyond the shuttle:
    /// `x_i h_i(x_i) + k_i` as coefficients in increasing degree.
    pub fn local_polynomial(&self, i: usize) -> Vec<Scalar> {
        let mut out = vec![self.kappa[&i].clone()];
        out.extend(self.h[&i].iter().cloned());
        out
    }

    /// `b_i = min(a_i, lowest degree of x_i h_i + k_i)`, which is `a_i` when
    /// that polynomial vanishes.
    pub fn b_chain(&self) -> Vec<u32> {
        (2..self.e())
            .map(|i| {
                let a = self.chain().a(i);
                let low = self
                    .local_polynomial(i)
                    .iter()
                    .position(|c| !c.is_zero())
                    .map_or(a, |k| k as u32);
                a.min(low)
            })
            .collect()
    }

    /// Carry a point of the input fiber to the normalized coordinates.
    pub fn map_point(&self, point: &[FieldElem], field: &Field, tau: &FieldElem) -> Result<Vec<FieldElem>> {
        let mut p = point.to_vec();
        for m in &self.maps {
            m.apply(&mut p, field, tau)?;
        }
        Ok(p)
    }
}

/// Alternate full right and left sweeps until every consecutive generator
/// has the normal-form shape modulo `t^{N+1}`, then keep sweeping until the
/// extracted data is a fixed point of a further pass.
pub fn normalize(gs: &GeneratorSet) -> Result<NormalizedDeformation> {
    for (i, j) in gs.chain().pairs() {
        gs.generator(i, j)?;
    }
    let n = gs.ring().spec().n();
    let mut cur = gs.relift()?;
    let mut res = residual(&cur)?;
    let mut audit = Vec::new();
    let mut maps = Vec::new();
    let mut pass = 0;
    let pass_once = |cur: &GeneratorSet, audit: &mut Vec<PassRecord>, maps: &mut Vec<PointMap>, before| {
        let (right, mut shifts, m1) = full_sweep(cur, Direction::Right)?;
        let (left, s2, m2) = full_sweep(&right, Direction::Left)?;
        shifts.extend(s2);
        maps.extend(m1);
        maps.extend(m2);
        let after = residual(&left)?;
        audit.push(PassRecord { pass: audit.len() + 1, residual_before: before, residual_after: after, shifts });
        Ok::<_, Error>((left, after))
    };
    loop {
        pass += 1;
        let before = res;
        (cur, res) = pass_once(&cur, &mut audit, &mut maps, before)?;
        if res > n {
            break;
        }
        if res <= before || pass > n as usize {
            return Err(Error::NoProgress { pass, before, after: res });
        }
    }
    let mut settling = 0;
    loop {
        let here = extract(cur.clone(), pass, Vec::new(), Vec::new())?;
        let (next, after) = pass_once(&cur, &mut audit, &mut maps, res)?;
        if after <= n {
            return Err(Error::NoProgress { pass: pass + settling + 1, before: res, after });
        }
        let there = extract(next.clone(), pass, Vec::new(), Vec::new())?;
        cur = next;
        if (&here.c, &here.h, &here.kappa) == (&there.c, &there.h, &there.kappa) {
            break;
        }
        settling += 1;
        if settling > n as usize + 1 {
            return Err(Error::NoProgress { pass: pass + settling, before: res, after });
        }
    }
    let mut d = extract(cur, pass, audit, maps)?;
    d.settling = settling;
    Ok(d)
}

/// Read `c`, `h` and `k` off a generator set already in normal form.
pub fn read_normal_form(generators: GeneratorSet, maps: Vec<PointMap>) -> Result<NormalizedDeformation> {
    extract(generators, 0, Vec::new(), maps)
}

fn extract(
    generators: GeneratorSet,
    passes: usize,
    audit: Vec<PassRecord>,
    maps: Vec<PointMap>,
) -> Result<NormalizedDeformation> {
    let e = generators.e();
    let chain = generators.chain().clone();
    let mut c = BTreeMap::new();
    let mut h = BTreeMap::new();
    let mut kappa = BTreeMap::new();
    for i in 2..e {
        let tail = generators.tail(i - 1, i + 1)?;
        c.insert(i + 1, tail.coeff(&XMonomial::var(e, i - 1)).div_t()?);
        kappa.insert(i, tail.coeff(&XMonomial::one(e)).div_t()?);
        let coeffs = (1..=chain.a(i))
            .map(|k| tail.coeff(&XMonomial::power(e, i, k)).div_t())
            .collect::<Result<Vec<_>>>()?;
        h.insert(i, coeffs);
    }
    Ok(NormalizedDeformation { generators, c, h, kappa, passes, settling: 0, audit, maps })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FarViolation {
    pub pair: Pair,
    pub term: String,
    pub reason: String,
}

/// Check that every far generator reads
/// `x_i (x_j + t c_j) - middle + t h_{i,j}` with `h_{i,j}` in `x_{i+1}..x_{j-1}`.
pub fn check_far_form(d: &NormalizedDeformation) -> Result<Vec<FarViolation>> {
    let gs = &d.generators;
    let e = gs.e();
    let mut out = Vec::new();
    for (i, j) in gs.chain().pairs() {
        if j - i < 3 {
            continue;
        }
        let tail = gs.compact(&gs.tail(i, j)?)?;
        let xi = XMonomial::var(e, i);
        let expected = d.c_at(j).mul_t_pow(1);
        let got = tail.coeff(&xi);
        if got != expected {
            out.push(FarViolation {
                pair: (i, j),
                term: format!("({got})*{xi}"),
                reason: format!("coefficient of x{i} should be t*c{j} = {expected}"),
            });
        }
        for (m, c) in tail.terms() {
            if *m == xi {
                continue;
            }
            let inside = match m.support_range() {
                None => true,
                Some((lo, hi)) => lo > i && hi < j,
            };
            if !inside {
                out.push(FarViolation {
                    pair: (i, j),
                    term: format!("({c})*{m}"),
                    reason: format!("tail term outside x{}..x{}", i + 1, j - 1),
                });
            }
        }
    }
    Ok(out)
}
