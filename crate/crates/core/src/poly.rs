//! Multivariate polynomials with dense fixed-length exponent vectors.
//!
//! Terms are kept in a `BTreeMap` with no zero coefficients, so equal
//! polynomials have identical representations.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use crate::scalar::{BaseField, Scalar};
use crate::{Error, Result};

/// Dense exponent vector; length is fixed by the owning ring or signature.
pub type Exps = SmallVec<[u16; 8]>;

pub fn zero_exps(n: usize) -> Exps {
    smallvec![0; n]
}

/// Graded reverse lexicographic comparison of raw exponent vectors.
pub fn cmp_grevlex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        ord => return ord,
    }
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => {}
            // smaller exponent in the last differing position wins
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    Ordering::Equal
}

/// A polynomial ring `K[vars]` over a base field.
#[derive(Debug, PartialEq, Eq)]
pub struct PolyRing {
    pub field: BaseField,
    pub vars: Vec<String>,
}

impl PolyRing {
    pub fn new(field: BaseField, vars: Vec<String>) -> Arc<Self> {
        Arc::new(PolyRing { field, vars })
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

#[derive(Clone)]
pub struct MultiPoly {
    ring: Arc<PolyRing>,
    terms: BTreeMap<Exps, Scalar>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        self.same_ring(other) && self.terms == other.terms
    }
}
impl Eq for MultiPoly {}

impl std::fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

impl MultiPoly {
    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        MultiPoly {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Arc<PolyRing>, c: Scalar) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(zero_exps(ring.nvars()), c);
        }
        p
    }

    pub fn one(ring: &Arc<PolyRing>) -> Self {
        Self::constant(ring, ring.field.one())
    }

    pub fn from_i64(ring: &Arc<PolyRing>, n: i64) -> Self {
        Self::constant(ring, ring.field.from_i64(n))
    }

    pub fn var(ring: &Arc<PolyRing>, idx: usize) -> Self {
        assert!(idx < ring.nvars());
        let mut e = zero_exps(ring.nvars());
        e[idx] = 1;
        let mut p = Self::zero(ring);
        p.terms.insert(e, ring.field.one());
        p
    }

    pub fn monomial(ring: &Arc<PolyRing>, exps: Exps, c: Scalar) -> Self {
        assert_eq!(exps.len(), ring.nvars());
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&e| e == 0))
    }

    /// The constant value, when the polynomial is constant.
    pub fn as_constant(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(self.ring.field.zero());
        }
        if self.is_constant() {
            return Some(self.terms.values().next().unwrap().clone());
        }
        None
    }

    fn same_ring(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring
    }

    pub fn check_same_ring(&self, other: &Self) -> Result<()> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "polynomial rings differ: [{}] vs [{}]",
                self.ring.vars.join(","),
                other.ring.vars.join(",")
            )))
        }
    }

    fn add_term(&mut self, exps: Exps, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = self.ring.field.add(e.get(), &c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert!(self.same_ring(other));
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = self.ring.field.neg(c);
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero(&self.ring);
        }
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = self.ring.field.mul(c, s);
        }
        r
    }

    pub fn mul_monomial(&self, exps: &[u16], s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero(&self.ring);
        }
        let mut r = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            for (i, x) in exps.iter().enumerate() {
                ne[i] += x;
            }
            r.terms.insert(ne, self.ring.field.mul(c, s));
        }
        r
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert!(self.same_ring(other));
        let mut r = Self::zero(&self.ring);
        for (e, c) in &other.terms {
            for (e2, c2) in &self.terms {
                let mut ne = e2.clone();
                for (i, x) in e.iter().enumerate() {
                    ne[i] += x;
                }
                r.add_term(ne, self.ring.field.mul(c, c2));
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ring);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal partial derivative with respect to variable `idx`.
    pub fn derivative(&self, idx: usize) -> Self {
        assert!(idx < self.ring.nvars());
        let mut r = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[idx] -= 1;
            let k = self.ring.field.from_i64(e[idx] as i64);
            r.add_term(ne, self.ring.field.mul(c, &k));
        }
        r
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
    }

    pub fn degree_in(&self, idx: usize) -> Option<u16> {
        self.terms.keys().map(|e| e[idx]).max()
    }

    /// Leading exponent vector under grevlex (structural, used for
    /// normalization only).
    pub fn grevlex_lm(&self) -> Option<&Exps> {
        self.terms.keys().max_by(|a, b| cmp_grevlex(a, b))
    }

    pub fn grevlex_lc(&self) -> Option<&Scalar> {
        self.grevlex_lm().map(|e| &self.terms[e])
    }

    /// Scales so the grevlex leading coefficient is one.
    pub fn monic(&self) -> Self {
        match self.grevlex_lc() {
            None => self.clone(),
            Some(lc) => {
                let inv = self.ring.field.inv(lc).expect("nonzero lc");
                self.scale(&inv)
            }
        }
    }

    /// Exact division; returns `None` when the divisor does not divide.
    pub fn exact_div(&self, div: &Self) -> Option<Self> {
        debug_assert!(self.same_ring(div));
        if div.is_zero() {
            return None;
        }
        let lm = div.grevlex_lm().unwrap().clone();
        let lc = div.terms[&lm].clone();
        let mut rem = self.clone();
        let mut quo = Self::zero(&self.ring);
        while !rem.is_zero() {
            let rlm = rem.grevlex_lm().unwrap().clone();
            if !lm.iter().zip(rlm.iter()).all(|(a, b)| a <= b) {
                return None;
            }
            let q_exps: Exps = rlm.iter().zip(lm.iter()).map(|(a, b)| a - b).collect();
            let q_coef = self
                .ring
                .field
                .div(&rem.terms[&rlm], &lc)
                .expect("nonzero lc");
            quo.add_term(q_exps.clone(), q_coef.clone());
            rem = rem.sub(&div.mul_monomial(&q_exps, &q_coef));
        }
        Some(quo)
    }

    /// Maps this polynomial into a ring with more variables. `map[i]` gives
    /// the index of variable `i` in the new ring.
    pub fn embed(&self, ring: &Arc<PolyRing>, map: &[usize]) -> Self {
        let mut r = MultiPoly::zero(ring);
        for (e, c) in &self.terms {
            let mut ne = zero_exps(ring.nvars());
            for (i, &x) in e.iter().enumerate() {
                ne[map[i]] = x;
            }
            r.terms.insert(ne, c.clone());
        }
        r
    }
}

impl std::fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| cmp_grevlex(b.0, a.0));
        for (i, (e, c)) in terms.iter().enumerate() {
            let is_const = e.iter().all(|&x| x == 0);
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = if neg { self.ring.field.neg(c) } else { (*c).clone() };
            let mut printed = false;
            if !mag.is_one() || is_const {
                write!(f, "{mag}")?;
                printed = true;
            }
            for (idx, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if printed {
                    write!(f, "*")?;
                }
                write!(f, "{}", self.ring.vars[idx])?;
                if x > 1 {
                    write!(f, "^{x}")?;
                }
                printed = true;
            }
        }
        Ok(())
    }
}

/// Checked arithmetic entry point matching the ring-mismatch contract.
pub fn poly_arith(a: &MultiPoly, b: &MultiPoly, op: PolyOp) -> Result<MultiPoly> {
    a.check_same_ring(b)?;
    Ok(match op {
        PolyOp::Add => a.add(b),
        PolyOp::Sub => a.sub(b),
        PolyOp::Mul => a.mul(b),
    })
}

#[derive(Debug, Clone, Copy)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_xy() -> Arc<PolyRing> {
        PolyRing::new(BaseField::Rationals, vec!["x".into(), "y".into()])
    }

    fn x2_minus_y3(r: &Arc<PolyRing>) -> MultiPoly {
        let x = MultiPoly::var(r, 0);
        let y = MultiPoly::var(r, 1);
        x.pow(2).sub(&y.pow(3))
    }

    #[test]
    fn additive_identity() {
        let r = ring_xy();
        let p = x2_minus_y3(&r);
        assert_eq!(p.add(&MultiPoly::zero(&r)), p);
    }

    #[test]
    fn difference_of_squares() {
        let r = ring_xy();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let left = x.sub(&y).mul(&x.add(&y));
        assert_eq!(left, x.pow(2).sub(&y.pow(2)));
    }

    #[test]
    fn f7_monomials() {
        let r = PolyRing::new(BaseField::prime(7).unwrap(), vec!["x".into()]);
        let x = MultiPoly::var(&r, 0);
        let a = x.scale(&Scalar::Fp(5));
        let b = x.scale(&Scalar::Fp(3));
        assert_eq!(a.mul(&b), x.pow(2)); // 15 = 1 mod 7
    }

    #[test]
    fn derivatives() {
        let r = ring_xy();
        let p = x2_minus_y3(&r);
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        assert_eq!(p.derivative(0), x.scale(&r.field.from_i64(2)));
        assert_eq!(p.derivative(1), y.pow(2).scale(&r.field.from_i64(-3)));
        assert!(y.pow(2).derivative(0).is_zero());
    }

    #[test]
    fn exact_division() {
        let r = ring_xy();
        let p = x2_minus_y3(&r);
        let x = MultiPoly::var(&r, 0);
        let prod = p.mul(&x).scale(&r.field.from_i64(2));
        assert_eq!(prod.exact_div(&p).unwrap(), x.scale(&r.field.from_i64(2)));
        assert!(p.exact_div(&x).is_none());
    }

    #[test]
    fn grevlex_ordering() {
        // equal total degree: x*y beats y^2
        assert_eq!(cmp_grevlex(&[1, 1], &[0, 2]), Ordering::Greater);
        assert_eq!(cmp_grevlex(&[1, 0], &[0, 2]), Ordering::Less);
    }

    #[test]
    fn display_roundtrip_sanity() {
        let r = ring_xy();
        let p = x2_minus_y3(&r);
        // grevlex display order puts the degree-3 term first
        assert_eq!(p.to_string(), "-y^3 + x^2");
    }
}
