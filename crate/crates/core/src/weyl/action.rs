//! The module action of operators on rational functions — the semantic
//! oracle for the whole crate. Base variables act by multiplication,
//! derivatives by differentiation, and `T` by multiplication with `1/f`.

use std::sync::Arc;

use crate::coef::Coef;
use crate::poly::{zero_exps, MultiPoly, PolyRing};
use crate::ratfun::RatFun;
use crate::{Error, Result};

use super::{multiply, AlgebraSignature, DerivTarget, PolyX, WeylElement};

fn check_function_ring(sig: &AlgebraSignature, g: &RatFun) -> Result<Arc<PolyRing>> {
    let full = sig.full_function_ring();
    if *g.ring().as_ref() != *full {
        return Err(Error::SignatureMismatch(format!(
            "function must live in K({})",
            full.vars.join(",")
        )));
    }
    Ok(full)
}

fn embed_coef(c: &Coef, full: &Arc<PolyRing>) -> RatFun {
    match c {
        Coef::S(s) => RatFun::from_poly(MultiPoly::constant(full, s.clone())),
        Coef::R(r) => {
            let map: Vec<usize> = (0..r.ring().nvars()).collect();
            RatFun::new(r.num().embed(full, &map), r.den().embed(full, &map))
                .expect("nonzero denominator")
        }
    }
}

pub(super) fn polyx_to_ratfun(
    sig: &AlgebraSignature,
    p: &PolyX,
    full: &Arc<PolyRing>,
) -> RatFun {
    let m_rat = sig.rational_vars().len();
    let mut acc = RatFun::zero(full);
    for (e, c) in &p.terms {
        let mut exps = zero_exps(full.nvars());
        for (i, &x) in e.iter().enumerate() {
            exps[m_rat + i] = x;
        }
        let mono = RatFun::from_poly(MultiPoly::monomial(full, exps, full.field.one()));
        acc = acc.add(&embed_coef(c, full).mul(&mono));
    }
    acc
}

/// Applies a scalar operator to a rational function, exactly.
pub fn apply_scalar(p: &WeylElement, g: &RatFun) -> Result<RatFun> {
    if !p.is_scalar() {
        return Err(Error::invalid("expected a position-free operator"));
    }
    let sig = p.sig();
    let full = check_function_ring(sig, g)?;
    let layout = sig.layout();
    let m_rat = sig.rational_vars().len();
    let f_inv = match sig.localization() {
        Some(loc) => Some(polyx_to_ratfun(sig, &loc.f, &full).inv()?),
        None => None,
    };
    let mut acc = RatFun::zero(&full);
    for (m, c) in p.terms() {
        let mut h = g.clone();
        if let Some(ts) = layout.t_slot {
            for _ in 0..m.exps[ts] {
                h = h.mul(f_inv.as_ref().expect("localized"));
            }
        }
        for &(slot, target) in &layout.derivs {
            let idx = match target {
                DerivTarget::Rational(j) => j,
                DerivTarget::Poly(i) => m_rat + i,
            };
            for _ in 0..m.exps[slot] {
                h = h.derivative(idx);
            }
        }
        let mut exps = zero_exps(full.nvars());
        for i in 0..layout.n_poly {
            exps[m_rat + i] = m.exps[i];
        }
        let mono = RatFun::from_poly(MultiPoly::monomial(&full, exps, full.field.one()));
        acc = acc.add(&embed_coef(c, &full).mul(&mono).mul(&h));
    }
    Ok(acc)
}

/// Applies a scalar operator to one function per module position.
pub fn act_on_rational(p: &WeylElement, gs: &[RatFun]) -> Result<Vec<RatFun>> {
    if gs.len() != p.sig().rank() as usize {
        return Err(Error::invalid(format!(
            "expected {} functions, got {}",
            p.sig().rank(),
            gs.len()
        )));
    }
    gs.iter().map(|g| apply_scalar(p, g)).collect()
}

/// Whether a generator annihilates the vector of functions: for a module
/// element the pairing `sum_i P_i . g_i` must vanish; a scalar operator in a
/// rank-1 signature is treated as its only component.
pub fn annihilates(p: &WeylElement, gs: &[RatFun]) -> Result<bool> {
    let sig = p.sig();
    if gs.len() != sig.rank() as usize {
        return Err(Error::invalid(format!(
            "expected {} functions, got {}",
            sig.rank(),
            gs.len()
        )));
    }
    if p.is_zero() {
        return Ok(true);
    }
    if p.is_scalar() {
        if sig.rank() != 1 {
            return Err(Error::invalid(
                "scalar operator in a higher-rank module: apply per position instead",
            ));
        }
        return Ok(apply_scalar(p, &gs[0])?.is_zero());
    }
    let full = check_function_ring(sig, &gs[0])?;
    let mut acc = RatFun::zero(&full);
    for pos in 1..=sig.rank() {
        let comp = p.component(pos);
        if comp.is_zero() {
            continue;
        }
        acc = acc.add(&apply_scalar(&comp, &gs[(pos - 1) as usize])?);
    }
    Ok(acc.is_zero())
}

/// Conjugation by `e^g`: replaces every derivative `D_v` by `D_v + g_v`.
/// `g` is a polynomial in all base variables (rational first), and the
/// element must be `T`-free.
pub fn conjugate_by_exp(p: &WeylElement, g: &MultiPoly) -> Result<WeylElement> {
    let sig = p.sig().clone();
    let full = sig.full_function_ring();
    if *g.ring().as_ref() != *full {
        return Err(Error::SignatureMismatch(
            "exponent polynomial over the wrong variables".into(),
        ));
    }
    if !p.is_t_free() {
        return Err(Error::invalid("conjugation is defined for T-free elements"));
    }
    let layout = sig.layout();
    let m_rat = sig.rational_vars().len();
    let mut factors = Vec::new();
    for &(slot, target) in &layout.derivs {
        let idx = match target {
            DerivTarget::Rational(j) => j,
            DerivTarget::Poly(i) => m_rat + i,
        };
        let gv = WeylElement::from_full_poly(&sig, &g.derivative(idx))?;
        let dv = WeylElement::deriv(&sig, target)?;
        factors.push((slot, dv.add(&gv)));
    }
    let mut acc = WeylElement::zero(&sig);
    for (m, c) in p.terms() {
        let mut base = WeylElement::zero(&sig);
        let mut exps = zero_exps(layout.len);
        for i in 0..layout.n_poly {
            exps[i] = m.exps[i];
        }
        base.add_term(super::Monomial { exps, pos: 0 }, c.clone());
        for (slot, factor) in &factors {
            for _ in 0..m.exps[*slot] {
                base = multiply(&base, factor)?;
            }
        }
        if m.pos > 0 {
            base = base.at_position(m.pos)?;
        }
        acc = acc.add(&base);
    }
    Ok(acc)
}

/// Whether a rank-1 generator annihilates `e^g`: conjugate and act on the
/// constant function 1.
pub fn annihilates_exp(p: &WeylElement, g: &MultiPoly) -> Result<bool> {
    let sig = p.sig();
    if sig.rank() != 1 && !p.is_scalar() {
        return Err(Error::invalid(
            "the exponential oracle supports rank-1 modules",
        ));
    }
    if p.is_zero() {
        return Ok(true);
    }
    let conj = conjugate_by_exp(p, g)?;
    let scalar = if conj.is_scalar() { conj } else { conj.component(1) };
    let full = sig.full_function_ring();
    Ok(apply_scalar(&scalar, &RatFun::one(&full))?.is_zero())
}
