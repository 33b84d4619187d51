//! Multivariate polynomial gcd via content/primitive-part recursion and
//! subresultant pseudo-remainder sequences.
//!
//! Results are normalized with grevlex leading coefficient one, and
//! `gcd(p, 0)` is the normalized `p`.

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::poly::MultiPoly;
use crate::scalar::{BaseField, Scalar};
use crate::Result;

/// Scales a polynomial over `QQ` by a rational unit so all coefficients are
/// coprime integers; gcds are computed on this form so the pseudo-remainder
/// sequences stay integral.
fn make_integral(p: &MultiPoly) -> MultiPoly {
    if p.ring().field != BaseField::Rationals || p.is_zero() {
        return p.clone();
    }
    let mut den_lcm = BigInt::one();
    let mut num_gcd = BigInt::zero();
    for (_, c) in p.terms() {
        if let Scalar::Q(q) = c {
            den_lcm = den_lcm.lcm(q.denom());
            num_gcd = num_gcd.gcd(q.numer());
        }
    }
    if num_gcd.is_zero() {
        num_gcd = BigInt::one();
    }
    p.scale(&Scalar::Q(BigRational::new(den_lcm, num_gcd)))
}

/// A greatest common divisor, grevlex-monic.
pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(a.ring());
    }
    // cheap wins first: equality, trial divisions (these cover the common
    // power-tower denominators), then a modular coprimality certificate
    if a == b {
        return a.monic();
    }
    if a.exact_div(b).is_some() {
        return b.monic();
    }
    if b.exact_div(a).is_some() {
        return a.monic();
    }
    if certified_coprime(a, b) {
        return MultiPoly::one(a.ring());
    }
    let a = &make_integral(a);
    let b = &make_integral(b);
    let nvars = a.ring().nvars();
    let v = (0..nvars)
        .rev()
        .find(|&i| a.degree_in(i).unwrap_or(0) > 0 || b.degree_in(i).unwrap_or(0) > 0)
        .expect("non-constant polynomial has a variable");
    let da = a.degree_in(v).unwrap_or(0);
    let db = b.degree_in(v).unwrap_or(0);
    if da == 0 {
        return gcd(a, &content_in(b, v));
    }
    if db == 0 {
        return gcd(&content_in(a, v), b);
    }
    if only_var(a, v) && only_var(b, v) {
        return euclid_univariate(a, b, v);
    }

    let ua = to_uni(a, v);
    let ub = to_uni(b, v);
    let cont_a = content_of(&ua);
    let cont_b = content_of(&ub);
    let c = gcd(&cont_a, &cont_b);
    let pa: Vec<MultiPoly> = ua
        .iter()
        .map(|p| p.exact_div(&cont_a).expect("content divides"))
        .collect();
    let pb: Vec<MultiPoly> = ub
        .iter()
        .map(|p| p.exact_div(&cont_b).expect("content divides"))
        .collect();
    let (hi, lo) = if da >= db { (pa, pb) } else { (pb, pa) };
    let g = subresultant_prs(hi, lo);
    let g_cont = content_of(&g);
    let g_pp: Vec<MultiPoly> = g
        .iter()
        .map(|p| p.exact_div(&g_cont).expect("content divides"))
        .collect();
    c.mul(&from_uni(&g_pp, v, a)).monic()
}

/// Checked entry point: same ring, base field coefficients.
pub fn poly_gcd(a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly> {
    a.check_same_ring(b)?;
    Ok(gcd(a, b))
}

pub fn lcm(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() || b.is_zero() {
        return MultiPoly::zero(a.ring());
    }
    let g = gcd(a, b);
    a.mul(b).exact_div(&g).expect("gcd divides product").monic()
}

fn only_var(p: &MultiPoly, v: usize) -> bool {
    p.terms().all(|(e, _)| {
        e.iter()
            .enumerate()
            .all(|(i, &x)| i == v || x == 0)
    })
}

/// Dense coefficient list of `p` viewed as univariate in `v`; the
/// coefficients have zero exponent in `v`.
fn to_uni(p: &MultiPoly, v: usize) -> Vec<MultiPoly> {
    let d = p.degree_in(v).unwrap_or(0) as usize;
    let mut coeffs = vec![MultiPoly::zero(p.ring()); d + 1];
    for (e, c) in p.terms() {
        let k = e[v] as usize;
        let mut ne = e.clone();
        ne[v] = 0;
        let m = MultiPoly::monomial(p.ring(), ne, c.clone());
        coeffs[k] = coeffs[k].add(&m);
    }
    coeffs
}

fn from_uni(coeffs: &[MultiPoly], v: usize, model: &MultiPoly) -> MultiPoly {
    let mut r = MultiPoly::zero(model.ring());
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut shift = crate::poly::zero_exps(model.ring().nvars());
        shift[v] = k as u16;
        r = r.add(&c.mul_monomial(&shift, &model.ring().field.one()));
    }
    r
}

fn deg_of(coeffs: &[MultiPoly]) -> Option<usize> {
    coeffs.iter().rposition(|c| !c.is_zero())
}

fn trim(mut coeffs: Vec<MultiPoly>) -> Vec<MultiPoly> {
    while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
        coeffs.pop();
    }
    coeffs
}

fn content_of(coeffs: &[MultiPoly]) -> MultiPoly {
    let ring = coeffs
        .iter()
        .find(|c| !c.is_zero())
        .expect("nonzero polynomial")
        .ring();
    let mut g = MultiPoly::zero(ring);
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn content_in(p: &MultiPoly, v: usize) -> MultiPoly {
    content_of(&to_uni(p, v))
}

/// Pseudo-remainder `prem(a, b)` in the main variable with the full
/// `lc(b)^(deg a - deg b + 1)` premultiplication.
fn prem(a: &[MultiPoly], b: &[MultiPoly]) -> Vec<MultiPoly> {
    let db = deg_of(b).expect("nonzero divisor");
    let lb = b[db].clone();
    let mut r: Vec<MultiPoly> = a.to_vec();
    let da = deg_of(&r).expect("nonzero dividend");
    let mut e = (da as i64) - (db as i64) + 1;
    while let Some(d) = deg_of(&r) {
        if d < db {
            break;
        }
        let lr = r[d].clone();
        // r = lb*r - lr * v^(d-db) * b
        let mut nr = vec![MultiPoly::zero(lb.ring()); d.max(db + (d - db)) + 1];
        for (k, c) in r.iter().enumerate() {
            nr[k] = c.mul(&lb);
        }
        for (k, c) in b.iter().enumerate() {
            let idx = k + (d - db);
            nr[idx] = nr[idx].sub(&c.mul(&lr));
        }
        r = trim(nr);
        e -= 1;
    }
    // account for skipped degree drops
    for _ in 0..e.max(0) {
        for c in r.iter_mut() {
            *c = c.mul(&lb);
        }
    }
    r
}

/// Subresultant polynomial remainder sequence on primitive inputs; returns
/// the last nonzero remainder (constant `1` when the gcd is trivial).
fn subresultant_prs(mut a: Vec<MultiPoly>, mut b: Vec<MultiPoly>) -> Vec<MultiPoly> {
    let ring = a[deg_of(&a).unwrap()].ring().clone();
    let mut g = MultiPoly::one(&ring);
    let mut h = MultiPoly::one(&ring);
    loop {
        let da = deg_of(&a).unwrap();
        let db = deg_of(&b).unwrap();
        let delta = da - db;
        let r = prem(&a, &b);
        if deg_of(&r).is_none() {
            return b;
        }
        if deg_of(&r) == Some(0) {
            return vec![MultiPoly::one(&ring)];
        }
        a = b;
        let divisor = g.mul(&h.pow(delta as u32));
        b = r
            .into_iter()
            .map(|c| c.exact_div(&divisor).expect("subresultant divisor"))
            .collect();
        b = trim(b);
        g = a[deg_of(&a).unwrap()].clone();
        if delta > 0 {
            h = g
                .pow(delta as u32)
                .exact_div(&h.pow(delta as u32 - 1))
                .expect("subresultant h update");
        }
    }
}

/// Univariate gcd over the base field: monic Euclid in `F_p` (no growth),
/// primitive pseudo-remainder sequence over `QQ` (keeps everything in small
/// integers; plain monic Euclid blows up rational coefficients).
fn euclid_univariate(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    if a.ring().field == BaseField::Rationals {
        return uni_primitive_prs_q(a, b, v);
    }
    let field = a.ring().field;
    let dense = |p: &MultiPoly| -> Vec<Scalar> {
        let d = p.degree_in(v).unwrap_or(0) as usize;
        let mut c = vec![field.zero(); d + 1];
        for (e, s) in p.terms() {
            c[e[v] as usize] = s.clone();
        }
        c
    };
    let mut x = dense(a);
    let mut y = dense(b);
    let deg = |c: &[Scalar]| c.iter().rposition(|s| !s.is_zero());
    loop {
        let dy = match deg(&y) {
            None => break,
            Some(d) => d,
        };
        let ly = y[dy].clone();
        // x mod y, with y made monic on the fly
        while let Some(dx) = deg(&x) {
            if dx < dy {
                break;
            }
            let q = field.div(&x[dx], &ly).expect("nonzero lc");
            for k in 0..=dy {
                let t = field.mul(&y[k], &q);
                x[k + dx - dy] = field.sub(&x[k + dx - dy], &t);
            }
        }
        std::mem::swap(&mut x, &mut y);
    }
    let dx = match deg(&x) {
        None => return MultiPoly::zero(a.ring()),
        Some(d) => d,
    };
    let lead = x[dx].clone();
    let mut r = MultiPoly::zero(a.ring());
    for (k, s) in x.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        let mut e = crate::poly::zero_exps(a.ring().nvars());
        e[v] = k as u16;
        let c = field.div(s, &lead).expect("nonzero lead");
        r = r.add(&MultiPoly::monomial(a.ring(), e, c));
    }
    r
}



/// Sound one-sided coprimality certificate: for every variable shared by
/// both supports, a degree-preserving evaluation of the remaining variables
/// produces univariate images with trivial gcd. A common divisor would keep
/// its degree under such an evaluation (the leading coefficients survive),
/// so it must be constant in every variable, hence a unit. Returns `false`
/// when nothing is certified.
fn certified_coprime(a: &MultiPoly, b: &MultiPoly) -> bool {
    const WITNESS_PRIME: u64 = 2_147_483_647;
    let prime = match a.ring().field {
        BaseField::Prime(p) => p,
        BaseField::Rationals => WITNESS_PRIME,
    };
    let nvars = a.ring().nvars();
    let shared: Vec<usize> = (0..nvars)
        .filter(|&v| a.degree_in(v).unwrap_or(0) > 0 && b.degree_in(v).unwrap_or(0) > 0)
        .collect();
    // variables in only one support cannot appear in a common divisor
    'vars: for &v in &shared {
        for attempt in 0..2u64 {
            let ia = eval_uni_mod(a, v, attempt, prime);
            let ib = eval_uni_mod(b, v, attempt, prime);
            let (Some(ia), Some(ib)) = (ia, ib) else { continue };
            let da = ia.iter().rposition(|&c| c != 0);
            let db = ib.iter().rposition(|&c| c != 0);
            if da != Some(a.degree_in(v).unwrap_or(0) as usize)
                || db != Some(b.degree_in(v).unwrap_or(0) as usize)
            {
                continue; // degenerate evaluation, retry
            }
            if gcd_degree_mod(&ia, &ib, prime) == 0 {
                continue 'vars;
            }
            return false; // images share a factor; no certificate
        }
        return false;
    }
    // every shared variable certified (or none shared, in which case any
    // common divisor is constant)
    true
}

/// Univariate image of `p` in variable `v`, all other variables evaluated at
/// small pseudorandom points mod `prime`. `None` when a rational coefficient
/// has a denominator divisible by the prime.
fn eval_uni_mod(p: &MultiPoly, v: usize, attempt: u64, prime: u64) -> Option<Vec<u64>> {
    let nvars = p.ring().nvars();
    let point: Vec<u64> = (0..nvars)
        .map(|i| 2 + ((attempt * 37 + i as u64 * 11) % 97))
        .collect();
    let d = p.degree_in(v).unwrap_or(0) as usize;
    let mut out = vec![0u64; d + 1];
    let mulp = |x: u64, y: u64| ((x as u128 * y as u128) % prime as u128) as u64;
    let powp = |mut base: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulp(acc, base);
            }
            base = mulp(base, base);
            e >>= 1;
        }
        acc
    };
    for (exps, c) in p.terms() {
        let cval = match c {
            Scalar::Fp(x) => *x % prime,
            Scalar::Q(q) => {
                let num = q.numer().mod_floor(&BigInt::from(prime));
                let den = q.denom().mod_floor(&BigInt::from(prime));
                let num = num.to_u64_digits().1.first().copied().unwrap_or(0);
                let den = den.to_u64_digits().1.first().copied().unwrap_or(0);
                if den == 0 {
                    return None;
                }
                mulp(num, powp(den, prime - 2))
            }
        };
        let mut val = cval;
        for (i, &e) in exps.iter().enumerate() {
            if i == v || e == 0 {
                continue;
            }
            val = mulp(val, powp(point[i], e as u64));
        }
        let slot = exps[v] as usize;
        out[slot] = (out[slot] + val) % prime;
    }
    Some(out)
}

fn gcd_degree_mod(a: &[u64], b: &[u64], prime: u64) -> usize {
    let mulp = |x: u64, y: u64| ((x as u128 * y as u128) % prime as u128) as u64;
    let powp = |mut base: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulp(acc, base);
            }
            base = mulp(base, base);
            e >>= 1;
        }
        acc
    };
    let deg = |c: &[u64]| c.iter().rposition(|&x| x != 0);
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while let Some(dy) = deg(&y) {
        let inv = powp(y[dy], prime - 2);
        while let Some(dx) = deg(&x) {
            if dx < dy {
                break;
            }
            let q = mulp(x[dx], inv);
            for k in 0..=dy {
                let t = mulp(y[k], q);
                x[k + dx - dy] = (x[k + dx - dy] + prime - t) % prime;
            }
        }
        std::mem::swap(&mut x, &mut y);
    }
    deg(&x).unwrap_or(0)
}

fn uni_primitive_prs_q(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let dense = |p: &MultiPoly| -> Vec<BigInt> {
        let q = make_integral(p);
        let d = q.degree_in(v).unwrap_or(0) as usize;
        let mut c = vec![BigInt::zero(); d + 1];
        for (e, s) in q.terms() {
            if let Scalar::Q(r) = s {
                c[e[v] as usize] = r.numer().clone();
            }
        }
        c
    };
    let deg = |c: &[BigInt]| c.iter().rposition(|s| !s.is_zero());
    let strip = |c: &mut Vec<BigInt>| {
        while c.last().map(|x| x.is_zero()).unwrap_or(false) {
            c.pop();
        }
        let mut g = BigInt::zero();
        for x in c.iter() {
            g = g.gcd(x);
        }
        if !g.is_zero() && !g.is_one() {
            for x in c.iter_mut() {
                *x /= &g;
            }
        }
    };
    let mut x = dense(a);
    strip(&mut x);
    let mut y = dense(b);
    strip(&mut y);
    while let Some(dy) = deg(&y) {
        let ly = y[dy].clone();
        let mut r = x.clone();
        while let Some(d) = deg(&r) {
            if d < dy {
                break;
            }
            let lr = r[d].clone();
            for c in r.iter_mut() {
                *c *= &ly;
            }
            for k in 0..=dy {
                let t = &y[k] * &lr;
                r[k + d - dy] -= t;
            }
        }
        strip(&mut r);
        x = std::mem::take(&mut y);
        y = r;
    }
    let dx = match deg(&x) {
        None => return MultiPoly::zero(a.ring()),
        Some(d) => d,
    };
    let lead = BigRational::from(x[dx].clone());
    let mut out = MultiPoly::zero(a.ring());
    for (k, s) in x.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        let mut e = crate::poly::zero_exps(a.ring().nvars());
        e[v] = k as u16;
        let c = BigRational::from(s.clone()) / &lead;
        out = out.add(&MultiPoly::monomial(a.ring(), e, Scalar::Q(c)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::PolyRing;
    use crate::scalar::BaseField;
    use std::sync::Arc;

    fn ring_xy() -> Arc<PolyRing> {
        PolyRing::new(BaseField::Rationals, vec!["x".into(), "y".into()])
    }

    #[test]
    fn gcd_common_factor() {
        let r = ring_xy();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let f = x.pow(2).sub(&y.pow(3));
        let g = f.mul(&x).scale(&r.field.from_i64(2));
        assert_eq!(gcd(&f, &g), f.monic());
        // x^2 - y^3 is already grevlex-monic up to sign of the y^3 term
        assert_eq!(gcd(&f, &g).mul(&MultiPoly::from_i64(&r, -1)), f);
    }

    #[test]
    fn gcd_with_zero() {
        let r = ring_xy();
        let x = MultiPoly::var(&r, 0);
        let p = x.pow(2).scale(&r.field.from_i64(3));
        assert_eq!(gcd(&p, &MultiPoly::zero(&r)), x.pow(2));
    }

    #[test]
    fn gcd_univariate_factorized() {
        let r = PolyRing::new(BaseField::Rationals, vec!["x".into()]);
        let x = MultiPoly::var(&r, 0);
        let one = MultiPoly::one(&r);
        let p = x.pow(2).sub(&one); // (x-1)(x+1)
        let q = x.sub(&one);
        assert_eq!(gcd(&p, &q), q);
    }

    #[test]
    fn gcd_multivariate_cofactors() {
        let r = ring_xy();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        let d = x.add(&y);
        let a = d.mul(&x.sub(&y));
        let b = d.mul(&x.mul(&y).add(&MultiPoly::one(&r)));
        let g = gcd(&a, &b);
        assert_eq!(g, d);
    }

    #[test]
    fn lcm_product_relation() {
        let r = ring_xy();
        let x = MultiPoly::var(&r, 0);
        let y = MultiPoly::var(&r, 1);
        assert_eq!(lcm(&x, &y), x.mul(&y));
    }
}
