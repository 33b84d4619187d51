//! Reduced fractions of multivariate polynomials.
//!
//! The pair is kept reduced by its gcd and the denominator grevlex-monic,
//! so equal values have identical representations.

use std::sync::Arc;

use crate::gcd::gcd;
use crate::poly::{MultiPoly, PolyRing};
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct RatFun {
    num: MultiPoly,
    den: MultiPoly,
}

impl std::fmt::Debug for RatFun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
    }
}

impl RatFun {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        num.check_same_ring(&den)?;
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: MultiPoly, den: MultiPoly) -> Self {
        if num.is_zero() {
            return RatFun {
                den: MultiPoly::one(num.ring()),
                num,
            };
        }
        let g = gcd(&num, &den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides"),
                den.exact_div(&g).expect("gcd divides"),
            )
        };
        let lc = den.grevlex_lc().expect("nonzero denominator").clone();
        if !lc.is_one() {
            let inv = num.ring().field.inv(&lc).expect("nonzero lc");
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RatFun { num, den }
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        RatFun {
            den: MultiPoly::one(p.ring()),
            num: p,
        }
    }

    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        Self::from_poly(MultiPoly::zero(ring))
    }

    pub fn one(ring: &Arc<PolyRing>) -> Self {
        Self::from_poly(MultiPoly::one(ring))
    }

    pub fn from_i64(ring: &Arc<PolyRing>, n: i64) -> Self {
        Self::from_poly(MultiPoly::from_i64(ring, n))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        self.num.ring()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// Addition with the classical cancellation pattern: with
    /// `g0 = gcd(d1, d2)` and cofactors `e_i = d_i/g0`, the sum is
    /// `(n1 e2 + n2 e1) / (g0 e1 e2)` and any residual common factor divides
    /// `g0`, so only one small gcd remains.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let g0 = gcd(&self.den, &other.den);
        if g0.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            // coprime denominators: the result is already reduced
            return Self::normalized(num, self.den.mul(&other.den));
        }
        let e1 = self.den.exact_div(&g0).expect("gcd divides");
        let e2 = other.den.exact_div(&g0).expect("gcd divides");
        let num = self.num.mul(&e2).add(&other.num.mul(&e1));
        let g1 = gcd(&num, &g0);
        if g1.is_one() {
            return Self::normalized(num, self.den.mul(&e2));
        }
        let num = num.exact_div(&g1).expect("gcd divides");
        let den = self.den.exact_div(&g1).expect("g1 divides g0").mul(&e2);
        Self::normalized(num, den)
    }

    pub fn neg(&self) -> Self {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplication by cross-cancellation; no residual gcd is needed.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.ring());
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let n1 = self.num.exact_div(&g1).expect("gcd divides");
        let n2 = other.num.exact_div(&g2).expect("gcd divides");
        let d1 = self.den.exact_div(&g2).expect("gcd divides");
        let d2 = other.den.exact_div(&g1).expect("gcd divides");
        Self::normalized(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.mul(&RatFun {
            num: other.den.clone(),
            den: other.num.clone(),
        }))
    }

    /// Re-normalizes an already-reduced pair (monic denominator).
    fn normalized(mut num: MultiPoly, mut den: MultiPoly) -> Self {
        if num.is_zero() {
            return RatFun {
                den: MultiPoly::one(num.ring()),
                num,
            };
        }
        let lc = den.grevlex_lc().expect("nonzero denominator").clone();
        if !lc.is_one() {
            let inv = num.ring().field.inv(&lc).expect("nonzero lc");
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RatFun { num, den }
    }

    pub fn inv(&self) -> Result<Self> {
        Self::one(self.ring()).div(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.ring());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Quotient-rule derivative with respect to variable `idx`, with the
    /// repeated factor `h = gcd(d, d')` cancelled up front (for `d = f^k`
    /// this keeps the denominator at `f^(k+1)` instead of `f^(2k)`).
    pub fn derivative(&self, idx: usize) -> Self {
        let dd = self.den.derivative(idx);
        if dd.is_zero() {
            return Self::normalized(self.num.derivative(idx), self.den.clone());
        }
        let h = gcd(&self.den, &dd);
        let q = self.den.exact_div(&h).expect("gcd divides");
        let num = self
            .num
            .derivative(idx)
            .mul(&q)
            .sub(&self.num.mul(&dd.exact_div(&h).expect("gcd divides")));
        Self::reduced(num, self.den.mul(&q))
    }
}

impl std::fmt::Display for RatFun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Checked field arithmetic on rational functions.
pub fn ratfun_arith(a: &RatFun, b: &RatFun, op: RatOp) -> Result<RatFun> {
    a.num().check_same_ring(b.num())?;
    match op {
        RatOp::Add => Ok(a.add(b)),
        RatOp::Sub => Ok(a.sub(b)),
        RatOp::Mul => Ok(a.mul(b)),
        RatOp::Div => a.div(b),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum RatOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BaseField;

    fn ring_t() -> Arc<PolyRing> {
        PolyRing::new(BaseField::Rationals, vec!["t".into()])
    }

    #[test]
    fn add_same_denominator() {
        let r = ring_t();
        let t = MultiPoly::var(&r, 0);
        let inv_t = RatFun::new(MultiPoly::one(&r), t.clone()).unwrap();
        let two_over_t = RatFun::new(MultiPoly::from_i64(&r, 2), t).unwrap();
        assert_eq!(inv_t.add(&inv_t), two_over_t);
    }

    #[test]
    fn inverse_pair() {
        let r = ring_t();
        let t = MultiPoly::var(&r, 0);
        let t1 = t.add(&MultiPoly::one(&r));
        let a = RatFun::new(t.clone(), t1.clone()).unwrap();
        let b = RatFun::new(t1, t).unwrap();
        assert!(a.mul(&b).is_one());
    }

    #[test]
    fn cancel_to_zero() {
        let r = PolyRing::new(BaseField::Rationals, vec!["x".into(), "y".into()]);
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let f = x.pow(2).sub(&y.pow(3));
        let a = RatFun::new(MultiPoly::one(&r), f).unwrap();
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn canonical_representation() {
        let r = ring_t();
        let t = MultiPoly::var(&r, 0);
        let t1 = t.add(&MultiPoly::one(&r));
        let scale = t1.mul(&t1).scale(&r.field.from_i64(7));
        let a = RatFun::new(t.clone(), t1.clone()).unwrap();
        let b = RatFun::new(t.mul(&scale), t1.mul(&scale)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quotient_rule() {
        let r = ring_t();
        let t = MultiPoly::var(&r, 0);
        let inv_t = RatFun::new(MultiPoly::one(&r), t.clone()).unwrap();
        let minus_t2 = RatFun::new(MultiPoly::from_i64(&r, -1), t.mul(&t)).unwrap();
        assert_eq!(inv_t.derivative(0), minus_t2);
    }
}
