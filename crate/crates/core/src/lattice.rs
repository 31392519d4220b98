//! Additive model of the toric surface: the monomial `x_i` maps to a lattice
//! vector `w_i` and every generator becomes an equality of lattice points.

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::series::XMonomial;

pub type Point = (i64, i64);

pub fn cross(a: Point, b: Point) -> i64 {
    a.0 * b.1 - a.1 * b.0
}

fn checked_cross(a: Point, b: Point) -> Result<i64> {
    a.0.checked_mul(b.1)
        .zip(a.1.checked_mul(b.0))
        .and_then(|(x, y)| x.checked_sub(y))
        .ok_or(Error::LatticeOverflow)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeModel {
    chain: Chain,
    w: Vec<Point>,
}

impl LatticeModel {
    /// `w_1 = (1,0)`, `w_2 = (1,1)`, `w_{i+1} = a_i w_i - w_{i-1}`.
    pub fn build(chain: &Chain) -> Result<Self> {
        chain.ensure_reduced()?;
        let e = chain.e();
        let mut w: Vec<Point> = vec![(1, 0), (1, 1)];
        for i in 2..e {
            let a = chain.a(i) as i64;
            let (p, q) = (w[i - 1], w[i - 2]);
            let next = (
                a.checked_mul(p.0).and_then(|x| x.checked_sub(q.0)),
                a.checked_mul(p.1).and_then(|x| x.checked_sub(q.1)),
            );
            match next {
                (Some(x), Some(y)) => w.push((x, y)),
                _ => return Err(Error::LatticeOverflow),
            }
        }
        Ok(LatticeModel { chain: chain.clone(), w })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    /// `w_i`, 1-based.
    pub fn w(&self, i: usize) -> Point {
        self.w[i - 1]
    }

    pub fn vectors(&self) -> &[Point] {
        &self.w
    }

    pub fn e(&self) -> usize {
        self.w.len()
    }

    pub fn cone_contains(&self, z: Point) -> bool {
        let (first, last) = (self.w[0], self.w[self.w.len() - 1]);
        matches!(
            (checked_cross(first, z), checked_cross(z, last)),
            (Ok(a), Ok(b)) if a >= 0 && b >= 0
        )
    }

    /// `mu(m) = sum exps_i * w_i`.
    pub fn mu(&self, m: &XMonomial) -> Result<Point> {
        let mut z: Point = (0, 0);
        for (k, &(x, y)) in m.exps().iter().zip(&self.w) {
            let k = *k as i64;
            z.0 = k.checked_mul(x).and_then(|v| v.checked_add(z.0)).ok_or(Error::LatticeOverflow)?;
            z.1 = k.checked_mul(y).and_then(|v| v.checked_add(z.1)).ok_or(Error::LatticeOverflow)?;
        }
        Ok(z)
    }

    /// Whether `m` equals `x_l` times a monomial in the special fiber.
    pub fn quasi_divisible(&self, m: &XMonomial, l: usize) -> bool {
        match self.mu(m) {
            Ok(z) => {
                let wl = self.w(l);
                self.cone_contains((z.0 - wl.0, z.1 - wl.1))
            }
            Err(_) => false,
        }
    }

    /// The monomial `x_i^alpha x_{i+1}^beta` with `mu = z`, for the smallest
    /// window `i` that contains `z`.
    pub fn canonical_monomial(&self, z: Point) -> Result<XMonomial> {
        if !self.cone_contains(z) {
            return Err(Error::NotInCone(z.0, z.1));
        }
        let e = self.e();
        for i in 1..e {
            let alpha = checked_cross(z, self.w(i + 1))?;
            let beta = checked_cross(self.w(i), z)?;
            if alpha >= 0 && beta >= 0 {
                let mut exps = vec![0u32; e];
                exps[i - 1] = u32::try_from(alpha).map_err(|_| Error::LatticeOverflow)?;
                exps[i] = u32::try_from(beta).map_err(|_| Error::LatticeOverflow)?;
                return Ok(XMonomial::from_exps(exps));
            }
        }
        Err(Error::NotRepresentable(z.0, z.1))
    }
}
