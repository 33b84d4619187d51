//! Base coefficient fields: exact rationals and word-sized prime fields.

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, Zero};

use crate::{Error, Result};

/// The prime used throughout the finite-field benchmarks.
pub const BENCH_PRIME: u64 = 536_870_909;

/// A base field: `QQ` or `F_p` with `p < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseField {
    Rationals,
    Prime(u64),
}

/// An element of a [`BaseField`]. `Fp` values are stored reduced mod `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Q(BigRational),
    Fp(u64),
}

impl BaseField {
    pub fn prime(p: u64) -> Result<Self> {
        if p >= (1 << 63) {
            return Err(Error::InvalidSignature(format!(
                "prime {p} does not fit in a machine word"
            )));
        }
        if !is_prime_u64(p) {
            return Err(Error::InvalidSignature(format!("{p} is not prime")));
        }
        Ok(BaseField::Prime(p))
    }

    pub fn zero(&self) -> Scalar {
        match self {
            BaseField::Rationals => Scalar::Q(BigRational::zero()),
            BaseField::Prime(_) => Scalar::Fp(0),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            BaseField::Rationals => Scalar::Q(BigRational::one()),
            BaseField::Prime(_) => Scalar::Fp(1),
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            BaseField::Rationals => Scalar::Q(BigRational::from(BigInt::from(n))),
            BaseField::Prime(p) => {
                let r = n.rem_euclid(*p as i64) as u64;
                Scalar::Fp(r)
            }
        }
    }

    pub fn from_bigint(&self, n: &BigInt) -> Scalar {
        match self {
            BaseField::Rationals => Scalar::Q(BigRational::from(n.clone())),
            BaseField::Prime(p) => {
                let p_big = BigInt::from(*p);
                let mut r = n % &p_big;
                if r.sign() == Sign::Minus {
                    r += &p_big;
                }
                let digits = r.to_u64_digits().1;
                Scalar::Fp(*digits.first().unwrap_or(&0))
            }
        }
    }

    /// Maps a rational `a/b` into the field (in `F_p`, via modular inverse).
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<Scalar> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self {
            BaseField::Rationals => Ok(Scalar::Q(BigRational::new(num.clone(), den.clone()))),
            BaseField::Prime(_) => {
                let n = self.from_bigint(num);
                let d = self.from_bigint(den);
                self.div(&n, &d)
            }
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (BaseField::Rationals, Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x + y),
            (BaseField::Prime(p), Scalar::Fp(x), Scalar::Fp(y)) => {
                let s = x + y;
                Scalar::Fp(if s >= *p { s - p } else { s })
            }
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self, a) {
            (BaseField::Rationals, Scalar::Q(x)) => Scalar::Q(-x),
            (BaseField::Prime(p), Scalar::Fp(x)) => Scalar::Fp(if *x == 0 { 0 } else { p - x }),
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (BaseField::Rationals, Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x * y),
            (BaseField::Prime(p), Scalar::Fp(x), Scalar::Fp(y)) => {
                Scalar::Fp(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Result<Scalar> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match (self, a) {
            (BaseField::Rationals, Scalar::Q(x)) => Ok(Scalar::Q(x.recip())),
            (BaseField::Prime(p), Scalar::Fp(x)) => Ok(Scalar::Fp(mod_inv(*x, *p))),
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Scalar, mut e: u64) -> Scalar {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(x) => x.is_zero(),
            Scalar::Fp(x) => *x == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(x) => x.is_one(),
            Scalar::Fp(x) => *x == 1,
        }
    }

    /// Display-level sign; prime-field values count as non-negative.
    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Q(x) => x.is_negative(),
            Scalar::Fp(_) => false,
        }
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Q(x) => write!(f, "{x}"),
            Scalar::Fp(x) => write!(f, "{x}"),
        }
    }
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // extended Euclid over i128; p < 2^63 so products fit
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "inverse of non-unit");
    s0.rem_euclid(p as i128) as u64
}

/// Deterministic Miller–Rabin, valid for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f7 = BaseField::prime(7).unwrap();
        let five = f7.from_i64(5);
        let three = f7.from_i64(3);
        assert_eq!(f7.mul(&five, &three), Scalar::Fp(1)); // 15 = 1 mod 7
        assert_eq!(f7.inv(&three).unwrap(), Scalar::Fp(5));
        assert!(f7.inv(&f7.zero()).is_err());
    }

    #[test]
    fn bench_prime_is_prime() {
        assert!(is_prime_u64(BENCH_PRIME));
        assert!(!is_prime_u64(BENCH_PRIME - 1));
        assert!(BaseField::prime(6).is_err());
    }

    #[test]
    fn rational_ops() {
        let q = BaseField::Rationals;
        let half = q.from_ratio(&BigInt::from(1), &BigInt::from(2)).unwrap();
        let two = q.from_i64(2);
        assert!(q.mul(&half, &two).is_one());
        assert_eq!(q.pow(&two, 10), q.from_i64(1024));
    }
}
