//! Normal-ordered products.
//!
//! A left term `c * x^a * D^b * T^j` is applied to a normal-ordered right
//! operand in stages, innermost factor first: `T^j`, then the derivatives,
//! then the commuting `x^a` and the coefficient. Derivatives entering from
//! the left never cross a `T` (the `T` block sits to their right), so the
//! only `T` rewriting happens when pushing `T^j` through a derivative block
//! via `T D_v = D_v T + f_v T^2`; those normal forms are memoized per
//! signature.

use std::sync::Arc;

use crate::coef::Coef;
use crate::poly::{zero_exps, Exps};

use super::{AlgebraSignature, DerivTarget, Monomial, WeylElement};

pub(super) fn mul_unchecked(p: &WeylElement, q: &WeylElement) -> WeylElement {
    let sig = p.sig().clone();
    let mut acc = WeylElement::zero(&sig);
    for (m1, c1) in p.terms() {
        let piece = if m1.pos == 0 {
            apply_left_monomial(&sig, m1, q)
        } else {
            // module element times scalar operator: componentwise on the right
            let mut scalar_mono = m1.clone();
            scalar_mono.pos = 0;
            let prod = apply_left_monomial(&sig, &scalar_mono, q);
            prod.at_position(m1.pos).expect("scalar product")
        };
        acc = acc.add(&piece.scale(c1));
    }
    acc
}

/// Applies the scalar monomial `x^a D^b T^j` on the left of `q`.
fn apply_left_monomial(sig: &Arc<AlgebraSignature>, m: &Monomial, q: &WeylElement) -> WeylElement {
    let layout = sig.layout();
    let mut cur = q.clone();
    if let Some(ts) = layout.t_slot {
        if m.exps[ts] > 0 {
            cur = lmul_t_pow(m.exps[ts], &cur);
        }
    }
    for &(slot, target) in &layout.derivs {
        if m.exps[slot] > 0 {
            cur = lmul_deriv_pow(sig, slot, target, m.exps[slot], &cur);
        }
    }
    // x part commutes with everything already in normal order
    let has_x = m.exps[..layout.n_poly].iter().any(|&e| e > 0);
    if has_x {
        let mut shifted = WeylElement::zero(sig);
        for (mq, c) in cur.terms() {
            let mut exps = mq.exps.clone();
            for i in 0..layout.n_poly {
                exps[i] += m.exps[i];
            }
            shifted.add_term(Monomial { exps, pos: mq.pos }, c.clone());
        }
        cur = shifted;
    }
    cur
}

/// `D_v^b` applied on the left of a normal-ordered element.
fn lmul_deriv_pow(
    sig: &Arc<AlgebraSignature>,
    slot: usize,
    target: DerivTarget,
    b: u16,
    q: &WeylElement,
) -> WeylElement {
    let field = sig.coef_field();
    let mut out = WeylElement::zero(sig);
    match target {
        DerivTarget::Poly(i) => {
            // D^b x^g = sum_k C(b,k) g(g-1)...(g-k+1) x^(g-k) D^(b-k)
            for (m, c) in q.terms() {
                let g = m.exps[i];
                let kmax = b.min(g);
                for k in 0..=kmax {
                    let coef = field.mul(
                        c,
                        &field.mul(&field.binomial(b, k), &field.falling(g, k)),
                    );
                    if coef.is_zero() {
                        continue;
                    }
                    let mut exps = m.exps.clone();
                    exps[i] = g - k;
                    exps[slot] += b - k;
                    out.add_term(Monomial { exps, pos: m.pos }, coef);
                }
            }
        }
        DerivTarget::Rational(j) => {
            // D^b c(t) = sum_k C(b,k) c^(k) D^(b-k)
            for (m, c) in q.terms() {
                let mut dc = c.clone();
                for k in 0..=b {
                    let coef = field.mul(&field.binomial(b, k), &dc);
                    if !coef.is_zero() {
                        let mut exps = m.exps.clone();
                        exps[slot] += b - k;
                        out.add_term(Monomial { exps, pos: m.pos }, coef);
                    }
                    if k < b {
                        dc = field.derivative(&dc, j);
                        if dc.is_zero() {
                            break;
                        }
                    }
                }
            }
        }
    }
    out
}

/// `T^j` applied on the left of a normal-ordered element.
pub(super) fn lmul_t_pow(j: u16, q: &WeylElement) -> WeylElement {
    let sig = q.sig().clone();
    let layout = sig.layout();
    let ts = layout.t_slot.expect("localized signature");
    if j == 0 {
        return q.clone();
    }
    let field = sig.coef_field();
    let mut out = WeylElement::zero(&sig);
    for (m, c) in q.terms() {
        let delta: Exps = layout.derivs.iter().map(|&(slot, _)| m.exps[slot]).collect();
        let parts = nf_t(&sig, j, &delta);
        for (exps_part, c_part) in parts.iter() {
            let mut exps = exps_part.clone();
            for i in 0..layout.n_poly {
                exps[i] += m.exps[i];
            }
            exps[ts] += m.exps[ts];
            out.add_term(
                Monomial { exps, pos: m.pos },
                field.mul(c, c_part),
            );
        }
    }
    out
}

/// Normal form of `T^j D^delta` as a list of scalar terms, memoized.
///
/// Recursion on the leftmost derivative: `T^j D_v = D_v T^j + j f_v T^(j+1)`.
fn nf_t(sig: &Arc<AlgebraSignature>, j: u16, delta: &Exps) -> Arc<Vec<(Exps, Coef)>> {
    let layout = sig.layout();
    let ts = layout.t_slot.expect("localized signature");
    let key = (j, delta.clone());
    if let Some(hit) = sig.memo_lookup(&key) {
        return hit;
    }
    let field = sig.coef_field();
    let result: Vec<(Exps, Coef)> = if delta.iter().all(|&e| e == 0) {
        let mut exps = zero_exps(layout.len);
        exps[ts] = j;
        vec![(exps, field.one())]
    } else {
        let d_idx = delta.iter().position(|&e| e > 0).unwrap();
        let (slot, _) = layout.derivs[d_idx];
        let mut rest = delta.clone();
        rest[d_idx] -= 1;

        let mut acc = WeylElement::zero(sig);
        // D_v * nf(T^j D^rest)
        for (exps, c) in nf_t(sig, j, &rest).iter() {
            let e = WeylElement::monomial_term(
                sig,
                Monomial {
                    exps: exps.clone(),
                    pos: 0,
                },
                c.clone(),
            );
            let target = layout.derivs[d_idx].1;
            acc = acc.add(&lmul_deriv_pow(sig, slot, target, 1, &e));
        }
        // j f_v * nf(T^(j+1) D^rest)
        if j > 0 {
            let fv = &sig.localization().unwrap().f_derivs[d_idx];
            let jf = field.from_i64(j as i64);
            for (exps, c) in nf_t(sig, j + 1, &rest).iter() {
                for (fe, fc) in &fv.terms {
                    let mut nexps = exps.clone();
                    for i in 0..layout.n_poly {
                        nexps[i] += fe[i];
                    }
                    let coef = field.mul(&jf, &field.mul(fc, c));
                    acc.add_term(Monomial { exps: nexps, pos: 0 }, coef);
                }
            }
        }
        acc.terms().map(|(m, c)| (m.exps.clone(), c.clone())).collect()
    };
    let arc = Arc::new(result);
    sig.memo_store(key, arc.clone());
    arc
}
