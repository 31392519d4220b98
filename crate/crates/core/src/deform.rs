//! Lifted generator sets `g'_{i,j} = g_{i,j} + t h_{i,j}`, the compacting
//! normal form, maximally divisible representatives and order-by-order
//! completion of consecutive deformation data to a flat family.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::chain::{Chain, SyzygyKind};
use crate::error::{Error, Result};
use crate::lattice::LatticeModel;
use crate::scalars::{DvrSpec, Scalar};
use crate::series::{Series, SeriesRing, XMonomial};

/// Upper bound on rewrite steps in a single compaction.
pub const MAX_REWRITE_STEPS: usize = 2_000_000;

pub type Pair = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    chain: Chain,
    ring: SeriesRing,
    lattice: LatticeModel,
    g: BTreeMap<Pair, Series>,
}

/// How [`GeneratorSet::compact_with`] picks the pair to rewrite.
pub enum Strategy<'a> {
    /// Smallest and largest variable in the support.
    Extremal,
    /// A uniformly random rewritable pair, with terms visited in random order.
    Random(&'a mut dyn RngCore),
}

impl GeneratorSet {
    fn empty(chain: &Chain, ring: SeriesRing) -> Result<Self> {
        let lattice = LatticeModel::build(chain)?;
        if ring.e() != chain.e() {
            return Err(Error::VariableMismatch { expected: chain.e(), got: ring.e() });
        }
        Ok(GeneratorSet { chain: chain.clone(), ring, lattice, g: BTreeMap::new() })
    }

    /// The undeformed ideal with every generator present.
    pub fn trivial(chain: &Chain, ring: SeriesRing) -> Result<Self> {
        let mut gs = Self::empty(chain, ring)?;
        for (i, j) in chain.pairs() {
            gs.g.insert((i, j), chain.generator(&ring, i, j)?);
        }
        Ok(gs)
    }

    /// Consecutive generators `g_{i-1,i+1} + t h_{i-1,i+1}` from a map
    /// `i -> h_{i-1,i+1}`; missing entries are zero. Far generators are absent.
    pub fn from_consecutive(chain: &Chain, ring: SeriesRing, h: &BTreeMap<usize, Series>) -> Result<Self> {
        let mut gs = Self::empty(chain, ring)?;
        for &i in h.keys() {
            if i < 2 || i + 1 > chain.e() {
                return Err(Error::BadVariable(i));
            }
        }
        for i in 2..chain.e() {
            let mut g = chain.generator(&ring, i - 1, i + 1)?;
            if let Some(hi) = h.get(&i) {
                g = g.add(&hi.mul_t_pow(1))?;
            }
            gs.g.insert((i - 1, i + 1), g);
        }
        Ok(gs)
    }

    /// Explicit generators. Consecutive pairs are mandatory and every entry
    /// must reduce to its template modulo `t`.
    pub fn from_generators(chain: &Chain, ring: SeriesRing, g: BTreeMap<Pair, Series>) -> Result<Self> {
        let mut gs = Self::empty(chain, ring)?;
        for ((i, j), s) in g {
            gs.set(i, j, s)?;
        }
        for i in 2..chain.e() {
            if !gs.g.contains_key(&(i - 1, i + 1)) {
                return Err(Error::MissingGenerator(i - 1, i + 1));
            }
        }
        Ok(gs)
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn ring(&self) -> SeriesRing {
        self.ring
    }

    pub fn lattice(&self) -> &LatticeModel {
        &self.lattice
    }

    pub fn e(&self) -> usize {
        self.chain.e()
    }

    pub fn is_complete(&self) -> bool {
        self.chain.pairs().iter().all(|p| self.g.contains_key(p))
    }

    pub fn generators(&self) -> impl Iterator<Item = (&Pair, &Series)> {
        self.g.iter()
    }

    pub fn generator(&self, i: usize, j: usize) -> Result<&Series> {
        self.g.get(&(i, j)).ok_or(Error::MissingGenerator(i, j))
    }

    pub fn template(&self, i: usize, j: usize) -> Result<Series> {
        self.chain.generator(&self.ring, i, j)
    }

    /// `t h_{i,j} = g'_{i,j} - g_{i,j}`.
    pub fn tail(&self, i: usize, j: usize) -> Result<Series> {
        self.generator(i, j)?.sub(&self.template(i, j)?)
    }

    /// Replace `g'_{i,j}`, checking that it lifts `g_{i,j}`.
    pub fn set(&mut self, i: usize, j: usize, g: Series) -> Result<()> {
        if j < i + 2 || j > self.e() || i == 0 {
            return Err(Error::MissingGenerator(i, j));
        }
        if g.ring() != self.ring {
            return Err(Error::SpecMismatch(self.ring.spec(), g.spec()));
        }
        let tail = g.sub(&self.template(i, j)?)?;
        if tail.min_t_degree() == 0 {
            return Err(Error::NotALift(i, j));
        }
        self.g.insert((i, j), g);
        Ok(())
    }

    /// Whether every generator reduces to its template modulo `t`.
    pub fn special_fiber_is_undeformed(&self) -> Result<bool> {
        for (&(i, j), g) in &self.g {
            if g.reduce_mod_t() != self.template(i, j)?.reduce_mod_t() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Same generators over another truncation of the base ring.
    pub fn retruncate(&self, spec: DvrSpec) -> Result<Self> {
        let ring = self.ring.with_spec(spec);
        let g = self
            .g
            .iter()
            .map(|(&p, s)| Ok((p, s.retruncate(spec)?)))
            .collect::<Result<_>>()?;
        Ok(GeneratorSet { chain: self.chain.clone(), ring, lattice: self.lattice.clone(), g })
    }

    /// Apply `x_l -> repl` to every generator.
    pub fn substitute(&self, l: usize, repl: &Series) -> Result<Self> {
        let g = self
            .g
            .iter()
            .map(|(&p, s)| Ok((p, s.substitute(l, repl)?)))
            .collect::<Result<_>>()?;
        Ok(GeneratorSet { g, ..self.clone() })
    }

    /// Replace every tail by its compact form.
    pub fn relift(&self) -> Result<Self> {
        let mut g = BTreeMap::new();
        for &(i, j) in self.g.keys() {
            let tail = self.compact(&self.tail(i, j)?)?;
            g.insert((i, j), self.template(i, j)?.add(&tail)?);
        }
        Ok(GeneratorSet { g, ..self.clone() })
    }

    fn check_series(&self, a: &Series) -> Result<()> {
        if a.spec() != self.ring.spec() {
            return Err(Error::SpecMismatch(self.ring.spec(), a.spec()));
        }
        if a.e() != self.e() {
            return Err(Error::VariableMismatch { expected: self.e(), got: a.e() });
        }
        Ok(())
    }

    /// Compact normal form: every monomial is supported on two consecutive
    /// variables. Two series are equal modulo the ideal iff their compact
    /// forms coincide (for flat, completed sets).
    pub fn compact(&self, a: &Series) -> Result<Series> {
        self.rewrite(a, &mut Strategy::Extremal, None)
    }

    pub fn compact_with(&self, a: &Series, strategy: &mut Strategy<'_>) -> Result<Series> {
        self.rewrite(a, strategy, None)
    }

    /// Compact form together with cofactors `c_{i,j}` such that
    /// `compact(a) = a - sum c_{i,j} g'_{i,j}`.
    pub fn compact_with_witness(&self, a: &Series) -> Result<(Series, BTreeMap<Pair, Series>)> {
        let mut witness = BTreeMap::new();
        let out = self.rewrite(a, &mut Strategy::Extremal, Some(&mut witness))?;
        Ok((out, witness))
    }

    fn rewrite(
        &self,
        a: &Series,
        strategy: &mut Strategy<'_>,
        mut witness: Option<&mut BTreeMap<Pair, Series>>,
    ) -> Result<Series> {
        self.check_series(a)?;
        let mut work = a.clone();
        let mut steps = 0usize;
        for v in 0..=self.ring.spec().n() {
            loop {
                let mut pending: Vec<XMonomial> = work
                    .terms()
                    .filter(|(m, c)| !m.is_compact() && c.valuation() == v)
                    .map(|(m, _)| m.clone())
                    .collect();
                if pending.is_empty() {
                    break;
                }
                if let Strategy::Random(rng) = strategy {
                    pending.shuffle(rng);
                }
                for m in pending {
                    let c = work.coeff(&m);
                    if c.is_zero() || c.valuation() != v {
                        continue;
                    }
                    let (p, q) = match strategy {
                        Strategy::Extremal => m.support_range().expect("non-compact"),
                        Strategy::Random(rng) => random_pair(&m, rng),
                    };
                    let rest = m
                        .div(&self.chain.leading_monomial(p, q))
                        .expect("pair divides the monomial");
                    let g = self.generator(p, q)?;
                    work.add_mul_term(g, &rest, &-&c)?;
                    if let Some(w) = witness.as_deref_mut() {
                        w.entry((p, q))
                            .or_insert_with(|| self.ring.zero())
                            .add_term(rest, c)?;
                    }
                    steps += 1;
                    if steps > MAX_REWRITE_STEPS {
                        return Err(Error::RewriteDiverged(steps));
                    }
                }
            }
        }
        Ok(work)
    }

    pub fn equal_in_r(&self, a: &Series, b: &Series) -> Result<bool> {
        Ok(self.compact(&a.sub(b)?)?.is_zero())
    }

    /// Representative of `p` in which every monomial quasi-divisible by `x_l`
    /// is a literal multiple of `x_l`.
    pub fn max_divisible_representative(&self, p: &Series, l: usize) -> Result<Series> {
        self.max_divisible_representative_except(p, l, |_| false)
    }

    /// As [`Self::max_divisible_representative`], leaving monomials for which
    /// `exempt` holds untouched.
    pub fn max_divisible_representative_except(
        &self,
        p: &Series,
        l: usize,
        exempt: impl Fn(&XMonomial) -> bool,
    ) -> Result<Series> {
        self.check_series(p)?;
        if l == 0 || l > self.e() {
            return Err(Error::BadVariable(l));
        }
        let wl = self.lattice.w(l);
        let mut work = p.clone();
        for v in 0..=self.ring.spec().n() {
            loop {
                let pending: Vec<XMonomial> = work
                    .terms()
                    .filter(|(m, c)| {
                        c.valuation() == v
                            && m.exp(l) == 0
                            && !exempt(m)
                            && self.lattice.quasi_divisible(m, l)
                    })
                    .map(|(m, _)| m.clone())
                    .collect();
                if pending.is_empty() {
                    break;
                }
                for m in pending {
                    let c = work.coeff(&m);
                    if c.is_zero() || c.valuation() != v {
                        continue;
                    }
                    let z = self.lattice.mu(&m)?;
                    let quotient = self.lattice.canonical_monomial((z.0 - wl.0, z.1 - wl.1))?;
                    let target = quotient.mul(&XMonomial::var(self.e(), l));
                    let one = Scalar::one(self.ring.spec());
                    let lhs = self.compact(&self.ring.term(m.clone(), one.clone()))?;
                    let rhs = self.compact(&self.ring.term(target.clone(), one))?;
                    let correction = lhs.sub(&rhs)?;
                    work.add_term(m, -&c)?;
                    work.add_term(target, c.clone())?;
                    work.add_mul_term(&correction, &XMonomial::one(self.e()), &c)?;
                }
            }
        }
        Ok(work)
    }

    /// Value of a relation on the current generators.
    pub fn evaluate_syzygy(&self, kind: SyzygyKind, triple: (usize, usize, usize)) -> Result<Series> {
        let (i, j, k) = triple;
        self.chain
            .syzygy(kind, i, j, k)
            .evaluate(|a, b| self.generator(a, b).cloned())
    }
}

fn random_pair(m: &XMonomial, rng: &mut &mut dyn RngCore) -> Pair {
    let support: Vec<usize> = (1..=m.e()).filter(|&i| m.exp(i) > 0).collect();
    let mut pairs = Vec::new();
    for &p in &support {
        for &q in &support {
            if q >= p + 2 {
                pairs.push((p, q));
            }
        }
    }
    pairs[rng.gen_range(0..pairs.len())]
}

/// First relation that fails to lift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    /// t-order at which lifting fails.
    pub order: u32,
    pub kind: SyzygyKind,
    pub triple: (usize, usize, usize),
    /// Compact residue of the relation at that order.
    pub residue: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Completion {
    Flat(GeneratorSet),
    Obstructed(Obstruction),
}

impl Completion {
    pub fn flat(self) -> Option<GeneratorSet> {
        match self {
            Completion::Flat(g) => Some(g),
            Completion::Obstructed(_) => None,
        }
    }
}

/// Build far generators from consecutive data `i -> h_{i-1,i+1}`.
pub fn complete_to_flat(chain: &Chain, ring: SeriesRing, consecutive: &BTreeMap<usize, Series>) -> Result<Completion> {
    complete(GeneratorSet::from_consecutive(chain, ring, consecutive)?)
}

/// Fill in (or correct) the far generators order by order in `t` so that
/// every relation between the generators lifts.
///
/// At order `m` each far pair `(a,b)`, by increasing spread, is corrected
/// using the relation `x_{b-2} g_{a,b} = x_a g_{b-2,b} + x_{b-1}^{a_{b-1}-1} g_{a,b-1}`;
/// the correction is the quotient of the residue by `x_{b-2}` in the special
/// fiber, which is unique when it exists. All relations are then checked at
/// that order.
pub fn complete(mut gs: GeneratorSet) -> Result<Completion> {
    let chain = gs.chain.clone();
    for (i, j) in chain.pairs() {
        if !gs.g.contains_key(&(i, j)) {
            gs.g.insert((i, j), gs.template(i, j)?);
        }
    }
    let full = gs.ring.spec();
    let syzygies = chain.syzygies();
    let far: Vec<Pair> = chain.pairs().into_iter().filter(|(a, b)| b - a >= 3).collect();
    for m in 1..=full.n() {
        let spec_m = full.with_truncation(m)?;
        for &(a, b) in &far {
            let gm = gs.retruncate(spec_m)?;
            let triple = (a, b - 2, b);
            let residue = gm.compact(&gm.evaluate_syzygy(SyzygyKind::Right, triple)?)?;
            if residue.is_zero() {
                continue;
            }
            let low = residue.min_t_degree();
            if low < m {
                return Ok(Completion::Obstructed(Obstruction {
                    order: low,
                    kind: SyzygyKind::Right,
                    triple,
                    residue: residue.to_string(),
                }));
            }
            let l = b - 2;
            let wl = gm.lattice.w(l);
            let mut delta = gm.ring.zero();
            for (mono, c) in residue.terms() {
                if !gm.lattice.quasi_divisible(mono, l) {
                    return Ok(Completion::Obstructed(Obstruction {
                        order: m,
                        kind: SyzygyKind::Right,
                        triple,
                        residue: residue.to_string(),
                    }));
                }
                let z = gm.lattice.mu(mono)?;
                let q = gm.lattice.canonical_monomial((z.0 - wl.0, z.1 - wl.1))?;
                delta.add_term(q, -c)?;
            }
            let updated = gs.g[&(a, b)].add(&delta.retruncate(full)?)?;
            gs.g.insert((a, b), updated);
        }
        let gm = gs.retruncate(spec_m)?;
        for s in &syzygies {
            let residue = gm.compact(&gm.evaluate_syzygy(s.kind, s.triple)?)?;
            if !residue.is_zero() {
                return Ok(Completion::Obstructed(Obstruction {
                    order: residue.min_t_degree(),
                    kind: s.kind,
                    triple: s.triple,
                    residue: residue.to_string(),
                }));
            }
        }
    }
    Ok(Completion::Flat(gs))
}

/// Compact residues of every relation, for auditing a completed set.
pub fn syzygy_residues(gs: &GeneratorSet) -> Result<Vec<((SyzygyKind, (usize, usize, usize)), Series)>> {
    gs.chain
        .syzygies()
        .into_iter()
        .map(|s| Ok(((s.kind, s.triple), gs.compact(&gs.evaluate_syzygy(s.kind, s.triple)?)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(a: &[u32], n: u32) -> (Chain, SeriesRing) {
        let c = Chain::new(a.to_vec());
        let r = SeriesRing::new(c.e(), DvrSpec::equal_char_zero(n).unwrap(), c.default_cap());
        (c, r)
    }

    fn h(r: &SeriesRing, items: &[(usize, &str)]) -> BTreeMap<usize, Series> {
        items.iter().map(|(i, s)| (*i, r.parse(s).unwrap())).collect()
    }

    #[test]
    fn compact_examples() {
        let (c, r) = setup(&[2, 2], 3);
        let gs = GeneratorSet::trivial(&c, r).unwrap();
        assert_eq!(gs.compact(&r.parse("x1*x4").unwrap()).unwrap(), r.parse("x2*x3").unwrap());
        let cube = r.parse("x2^3").unwrap();
        assert_eq!(gs.compact(&cube).unwrap(), cube);

        let (c, r) = setup(&[2, 2, 2], 3);
        let gs = GeneratorSet::trivial(&c, r).unwrap();
        let m = XMonomial::from_exps(vec![1, 0, 1, 0, 1]);
        let expected = gs.lattice().canonical_monomial(gs.lattice().mu(&m).unwrap()).unwrap();
        let got = gs.compact(&r.term(m, Scalar::one(r.spec()))).unwrap();
        assert_eq!(got, r.term(expected, Scalar::one(r.spec())));
    }

    #[test]
    fn equality_in_the_quotient() {
        let (c, r) = setup(&[2], 3);
        let gs = GeneratorSet::trivial(&c, r).unwrap();
        assert!(gs.equal_in_r(&r.parse("x1*x3").unwrap(), &r.parse("x2^2").unwrap()).unwrap());
        assert!(!gs.equal_in_r(&r.var(1), &r.var(2)).unwrap());
        let deformed = complete_to_flat(&c, r, &h(&r, &[(2, "x2")])).unwrap().flat().unwrap();
        assert_eq!(
            deformed.compact(&r.parse("x1*x3").unwrap()).unwrap(),
            r.parse("x2^2 - t*x2").unwrap()
        );
        assert!(deformed
            .equal_in_r(&r.parse("x1*x3").unwrap(), &r.parse("x2^2 - t*x2").unwrap())
            .unwrap());
    }

    #[test]
    fn witness_reconstructs_input() {
        let (c, r) = setup(&[2, 3, 2], 3);
        let gs = complete_to_flat(&c, r, &h(&r, &[(3, "x3")])).unwrap().flat().unwrap();
        let a = r.parse("x1*x5*x3 + t*x1^2*x4 - x2*x5").unwrap();
        let (nf, w) = gs.compact_with_witness(&a).unwrap();
        let mut rebuilt = nf.clone();
        for ((i, j), cof) in &w {
            rebuilt = rebuilt.add(&cof.mul(gs.generator(*i, *j).unwrap()).unwrap()).unwrap();
        }
        assert_eq!(rebuilt, a);
        assert!(nf.terms().all(|(m, _)| m.is_compact()));
    }

    #[test]
    fn random_order_agrees() {
        let (c, r) = setup(&[3, 2, 2], 3);
        let gs = complete_to_flat(&c, r, &h(&r, &[(2, "x2^2"), (4, "x4")])).unwrap().flat().unwrap();
        let a = r.parse("x1^2*x5 + t*x1*x3*x5 + x2*x4 - 3*t^2*x1*x4").unwrap();
        let canonical = gs.compact(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let got = gs.compact_with(&a, &mut Strategy::Random(&mut rng)).unwrap();
            assert_eq!(got, canonical);
        }
    }

    #[test]
    fn max_divisible_examples() {
        let (c, r) = setup(&[2], 3);
        let gs = GeneratorSet::trivial(&c, r).unwrap();
        let p = r.parse("x2^2").unwrap();
        assert_eq!(gs.max_divisible_representative(&p, 1).unwrap(), r.parse("x1*x3").unwrap());
        let p = r.parse("x1*x2").unwrap();
        assert_eq!(gs.max_divisible_representative(&p, 1).unwrap(), p);
        let p = r.var(2);
        assert_eq!(gs.max_divisible_representative(&p, 1).unwrap(), p);

        let deformed = complete_to_flat(&c, r, &h(&r, &[(2, "x1")])).unwrap().flat().unwrap();
        let p = r.parse("x2^2").unwrap();
        let rep = deformed.max_divisible_representative(&p, 1).unwrap();
        assert_eq!(rep, r.parse("x1*x3 + t*x1").unwrap());
        assert!(deformed.equal_in_r(&rep, &p).unwrap());
    }

    #[test]
    fn completion_examples() {
        let (c, r) = setup(&[2], 3);
        let gs = complete_to_flat(&c, r, &h(&r, &[(2, "x1 + 5")])).unwrap().flat().unwrap();
        assert_eq!(gs.generators().count(), 1);

        let (c, r) = setup(&[2, 2], 3);
        let gs = complete_to_flat(&c, r, &BTreeMap::new()).unwrap().flat().unwrap();
        assert_eq!(gs, GeneratorSet::trivial(&c, r).unwrap());

        let out = complete_to_flat(&c, r, &h(&r, &[(2, "1")])).unwrap();
        match out {
            Completion::Obstructed(o) => {
                assert_eq!(o.order, 1);
                assert_eq!(o.triple, (1, 2, 4));
            }
            Completion::Flat(_) => panic!("constant perturbation of g13 should not be flat"),
        }

        match complete_to_flat(&c, r, &h(&r, &[(2, "x1")])).unwrap() {
            Completion::Obstructed(o) => assert_eq!((o.order, o.residue.as_str()), (2, "t^2*x1")),
            Completion::Flat(_) => panic!("x1 alone on g13 lifts only to first order"),
        }
        let (_, r1) = setup(&[2, 2], 1);
        let gs = complete_to_flat(&c, r1, &h(&r1, &[(2, "x1")])).unwrap().flat().unwrap();
        assert_eq!(gs.tail(1, 4).unwrap(), r1.parse("t*x2").unwrap());

        // x3 -> x3 + t applied to the undeformed equations
        let gs = complete_to_flat(&c, r, &h(&r, &[(2, "x1"), (3, "-2*x3 - t")])).unwrap().flat().unwrap();
        assert_eq!(gs.tail(1, 4).unwrap(), r.parse("-t*x2").unwrap());
        for (_, res) in syzygy_residues(&gs).unwrap() {
            assert!(res.is_zero());
        }
    }
}
