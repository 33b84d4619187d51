//! Coefficient fields of algebra signatures.
//!
//! A signature's coefficients live in `K` or in the fraction field
//! `K(t_1,...,t_m)` of a polynomial ring over the rational variables. The
//! scalar case is kept as a separate variant so purely polynomial signatures
//! pay no fraction overhead.

use std::sync::Arc;

use crate::poly::{MultiPoly, PolyRing};
use crate::ratfun::RatFun;
use crate::scalar::{BaseField, Scalar};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefField {
    pub base: BaseField,
    /// Ring over the rational variables, absent when there are none.
    pub ring: Option<Arc<PolyRing>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coef {
    S(Scalar),
    R(RatFun),
}

impl CoefField {
    pub fn new(base: BaseField, rational_vars: &[String]) -> Self {
        let ring = if rational_vars.is_empty() {
            None
        } else {
            Some(PolyRing::new(base, rational_vars.to_vec()))
        };
        CoefField { base, ring }
    }

    pub fn nvars(&self) -> usize {
        self.ring.as_ref().map(|r| r.nvars()).unwrap_or(0)
    }

    pub fn zero(&self) -> Coef {
        match &self.ring {
            None => Coef::S(self.base.zero()),
            Some(r) => Coef::R(RatFun::zero(r)),
        }
    }

    pub fn one(&self) -> Coef {
        match &self.ring {
            None => Coef::S(self.base.one()),
            Some(r) => Coef::R(RatFun::one(r)),
        }
    }

    pub fn from_i64(&self, n: i64) -> Coef {
        match &self.ring {
            None => Coef::S(self.base.from_i64(n)),
            Some(r) => Coef::R(RatFun::from_i64(r, n)),
        }
    }

    pub fn from_scalar(&self, s: Scalar) -> Coef {
        match &self.ring {
            None => Coef::S(s),
            Some(r) => Coef::R(RatFun::from_poly(MultiPoly::constant(r, s))),
        }
    }

    pub fn var(&self, idx: usize) -> Coef {
        let r = self.ring.as_ref().expect("no rational variables");
        Coef::R(RatFun::from_poly(MultiPoly::var(r, idx)))
    }

    pub fn add(&self, a: &Coef, b: &Coef) -> Coef {
        match (a, b) {
            (Coef::S(x), Coef::S(y)) => Coef::S(self.base.add(x, y)),
            (Coef::R(x), Coef::R(y)) => Coef::R(x.add(y)),
            _ => panic!("coefficient field mismatch"),
        }
    }

    pub fn sub(&self, a: &Coef, b: &Coef) -> Coef {
        match (a, b) {
            (Coef::S(x), Coef::S(y)) => Coef::S(self.base.sub(x, y)),
            (Coef::R(x), Coef::R(y)) => Coef::R(x.sub(y)),
            _ => panic!("coefficient field mismatch"),
        }
    }

    pub fn mul(&self, a: &Coef, b: &Coef) -> Coef {
        match (a, b) {
            (Coef::S(x), Coef::S(y)) => Coef::S(self.base.mul(x, y)),
            (Coef::R(x), Coef::R(y)) => Coef::R(x.mul(y)),
            _ => panic!("coefficient field mismatch"),
        }
    }

    pub fn neg(&self, a: &Coef) -> Coef {
        match a {
            Coef::S(x) => Coef::S(self.base.neg(x)),
            Coef::R(x) => Coef::R(x.neg()),
        }
    }

    pub fn inv(&self, a: &Coef) -> Result<Coef> {
        match a {
            Coef::S(x) => Ok(Coef::S(self.base.inv(x)?)),
            Coef::R(x) => Ok(Coef::R(x.inv()?)),
        }
    }

    pub fn div(&self, a: &Coef, b: &Coef) -> Result<Coef> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn mul_i64(&self, a: &Coef, n: i64) -> Coef {
        self.mul(a, &self.from_i64(n))
    }

    /// Derivative with respect to rational variable `idx`; scalars go to zero.
    pub fn derivative(&self, a: &Coef, idx: usize) -> Coef {
        match a {
            Coef::S(_) => self.zero(),
            Coef::R(x) => Coef::R(x.derivative(idx)),
        }
    }

    /// Binomial coefficient as a field element, built multiplicatively so it
    /// is exact in every characteristic.
    pub fn binomial(&self, n: u16, k: u16) -> Coef {
        let mut acc = self.one();
        for i in 0..k {
            acc = self.mul_i64(&acc, (n - i) as i64);
            acc = self
                .div(&acc, &self.from_i64((i + 1) as i64))
                .expect("nonzero factorial");
        }
        acc
    }

    /// Falling factorial `n (n-1) ... (n-k+1)` as a field element.
    pub fn falling(&self, n: u16, k: u16) -> Coef {
        let mut acc = self.one();
        for i in 0..k {
            acc = self.mul_i64(&acc, (n - i) as i64);
        }
        acc
    }
}

impl Coef {
    pub fn is_zero(&self) -> bool {
        match self {
            Coef::S(x) => x.is_zero(),
            Coef::R(x) => x.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coef::S(x) => x.is_one(),
            Coef::R(x) => x.is_one(),
        }
    }

    /// Display-level sign used when joining terms with `+`/`-`.
    pub fn is_display_negative(&self) -> bool {
        match self {
            Coef::S(x) => x.is_negative(),
            Coef::R(x) => x
                .num()
                .grevlex_lc()
                .map(|c| c.is_negative())
                .unwrap_or(false),
        }
    }

    pub fn as_scalar(&self) -> Option<&Scalar> {
        match self {
            Coef::S(x) => Some(x),
            Coef::R(_) => None,
        }
    }

    pub fn as_ratfun(&self) -> Option<&RatFun> {
        match self {
            Coef::R(x) => Some(x),
            Coef::S(_) => None,
        }
    }

    /// True when the value is a polynomial (no denominator).
    pub fn is_polynomial(&self) -> bool {
        match self {
            Coef::S(_) => true,
            Coef::R(x) => x.is_polynomial(),
        }
    }
}

impl std::fmt::Display for Coef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coef::S(x) => write!(f, "{x}"),
            Coef::R(x) => write!(f, "{x}"),
        }
    }
}

/// The recursive field description exposed by the problem format. Nested
/// fraction fields are canonicalized by merging variable lists, since
/// `K(t)(x)` and `K(t,x)` are the same field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldSpec {
    Rationals,
    Prime(u64),
    FractionField { base: Box<FieldSpec>, vars: Vec<String> },
}

impl FieldSpec {
    pub fn fraction_field(base: FieldSpec, vars: Vec<String>) -> Result<FieldSpec> {
        let mut all = Vec::new();
        let inner = match base {
            FieldSpec::FractionField { base, vars } => {
                all.extend(vars);
                *base
            }
            other => other,
        };
        all.extend(vars);
        let mut seen = std::collections::HashSet::new();
        for v in &all {
            if !seen.insert(v.clone()) {
                return Err(Error::InvalidSignature(format!(
                    "duplicate fraction-field variable `{v}`"
                )));
            }
        }
        Ok(FieldSpec::FractionField {
            base: Box::new(inner),
            vars: all,
        })
    }

    pub fn base(&self) -> Result<BaseField> {
        match self {
            FieldSpec::Rationals => Ok(BaseField::Rationals),
            FieldSpec::Prime(p) => BaseField::prime(*p),
            FieldSpec::FractionField { base, .. } => base.base(),
        }
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "QQ"),
            FieldSpec::Prime(p) => write!(f, "Fp({p})"),
            FieldSpec::FractionField { base, vars } => {
                write!(f, "{}({})", base, vars.join(","))
            }
        }
    }
}
