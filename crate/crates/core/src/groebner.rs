//! Buchberger-style Gröbner bases for finitely generated free modules over
//! any signature expressible in [`crate::weyl`]: noncommutative Weyl, mixed,
//! `T`-extended, or fully commutative.
//!
//! `T` exponents are treated as part of the module position (the algebra
//! `W[T]^r` is a free `W`-module with basis `T^j e_i`), so multipliers are
//! commutative monomials in the scalar variables and every Gröbner run over
//! a `T`-truncation terminates.
//!
//! Pair selection uses the normal strategy (minimal lcm, insertion age as
//! tie-break) with Gebauer–Möller-style lcm-divisibility filtering only. The
//! commutative product criterion is deliberately absent: in `W_x` the pair
//! `(x, Dx)` has coprime leading monomials yet its S-pair reduces to 1.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::coef::{Coef, CoefField};
use crate::error::BudgetKind;
use crate::gcd;
use crate::order::{CompiledOrder, OrderSpec};
use crate::poly::MultiPoly;
use crate::ratfun::RatFun;
use crate::scalar::Scalar;
use crate::weyl::{multiply, same_signature, AlgebraSignature, Monomial, WeylElement};
use crate::{Error, Result};

/// Resource caps for a single Gröbner run.
#[derive(Debug, Clone)]
pub struct EngineBudget {
    pub max_pairs: usize,
    /// Cap on the total number of stored terms across the basis and the
    /// working element (the "4 GiB-equivalent" default assumes ~64 bytes per
    /// term).
    pub max_terms: usize,
    pub timeout: Option<Duration>,
}

impl Default for EngineBudget {
    fn default() -> Self {
        EngineBudget {
            max_pairs: 1_000_000,
            max_terms: 67_108_864,
            timeout: Some(Duration::from_secs(1800)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EngineConfig {
    pub budget: EngineBudget,
    /// Record, for every basis element, an explicit left-combination of the
    /// input generators; replayable through `multiply` for soundness checks.
    pub track_certificates: bool,
}

/// An interreduced basis with its order and provenance.
#[derive(Debug, Clone)]
pub struct GroebnerBasis {
    pub sig: Arc<AlgebraSignature>,
    pub order: OrderSpec,
    pub elements: Vec<WeylElement>,
    pub reduced: bool,
    /// Per element, the left-combination coefficients over the inputs.
    pub certificates: Option<Vec<Vec<WeylElement>>>,
}

impl GroebnerBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn compiled(&self) -> Result<CompiledOrder> {
        self.order.compile(&self.sig)
    }

    /// Replays every certificate through `multiply` and compares.
    pub fn verify_certificates(&self, gens: &[WeylElement]) -> Result<bool> {
        let certs = self
            .certificates
            .as_ref()
            .ok_or_else(|| Error::invalid("certificates were not tracked"))?;
        let gens = position_generators(gens)?;
        for (elem, cert) in self.elements.iter().zip(certs.iter()) {
            let mut acc = WeylElement::zero(&self.sig);
            for (q, g) in cert.iter().zip(gens.iter()) {
                if q.is_zero() {
                    continue;
                }
                acc = acc.add(&multiply(q, g)?);
            }
            if acc != *elem {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

struct Guard {
    budget: EngineBudget,
    start: Instant,
    pairs_done: usize,
}

impl Guard {
    fn new(budget: &EngineBudget) -> Self {
        Guard {
            budget: budget.clone(),
            start: Instant::now(),
            pairs_done: 0,
        }
    }

    fn check(&self, live_terms: usize) -> std::result::Result<(), BudgetKind> {
        if self.pairs_done > self.budget.max_pairs {
            return Err(BudgetKind::Pairs);
        }
        if live_terms > self.budget.max_terms {
            return Err(BudgetKind::Terms);
        }
        if let Some(t) = self.budget.timeout {
            if self.start.elapsed() > t {
                return Err(BudgetKind::Timeout);
            }
        }
        Ok(())
    }
}

/// Rank-1 convenience: scalar generators are placed at position 1.
fn position_generators(gens: &[WeylElement]) -> Result<Vec<WeylElement>> {
    gens.iter()
        .map(|g| {
            if g.is_zero() || !g.is_scalar() {
                Ok(g.clone())
            } else if g.sig().rank() == 1 {
                g.at_position(1)
            } else {
                Err(Error::invalid(
                    "scalar generator in a higher-rank module; wrap it in a vector",
                ))
            }
        })
        .collect()
}

/// Division with remainder: returns `r` with `p - r` in the left module
/// generated by the reducers and no monomial of `r` divisible by any
/// reducer's leading monomial. Deterministic: the largest reducible monomial
/// is cleared first, against the applicable reducer with the smallest
/// leading monomial.
pub fn normal_form(
    p: &WeylElement,
    reducers: &[WeylElement],
    ord: &CompiledOrder,
) -> Result<WeylElement> {
    let (nf, _) = reduce_full(p, reducers, ord, None)?;
    Ok(nf)
}

type Quotients = Vec<Vec<(Monomial, Coef)>>;

fn reduce_full(
    p: &WeylElement,
    reducers: &[WeylElement],
    ord: &CompiledOrder,
    guard: Option<&Guard>,
) -> Result<(WeylElement, Quotients)> {
    let sig = p.sig();
    if !same_signature(sig, ord.sig()) {
        return Err(Error::SignatureMismatch("order over a different algebra".into()));
    }
    let layout = sig.layout();
    let field = sig.coef_field();
    struct Red<'a> {
        lm: Monomial,
        lc: Coef,
        elem: &'a WeylElement,
    }
    let mut reds = Vec::with_capacity(reducers.len());
    for g in reducers {
        if g.is_zero() {
            continue;
        }
        if !same_signature(sig, g.sig()) {
            return Err(Error::SignatureMismatch("reducer over a different algebra".into()));
        }
        let (lm, lc) = ord.leading_term(g)?;
        reds.push(Red {
            lm: lm.clone(),
            lc: lc.clone(),
            elem: g,
        });
    }
    let mut quotients: Quotients = vec![Vec::new(); reducers.len()];
    let orig_of: Vec<usize> = reducers
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_zero())
        .map(|(i, _)| i)
        .collect();

    let mut r = p.clone();
    let mut steps = 0usize;
    loop {
        if let Some(g) = guard {
            if steps % 64 == 0 {
                g.check(r.term_count())
                    .map_err(|kind| Error::BudgetExceeded {
                        kind,
                        pairs: g.pairs_done,
                        partial: vec![],
                    })?;
            }
        }
        steps += 1;
        // largest reducible monomial of r
        let mut target: Option<(Monomial, Coef)> = None;
        for (m, c) in r.terms() {
            if !reds.iter().any(|rd| rd.lm.divides(m, layout)) {
                continue;
            }
            match &target {
                Some((tm, _)) if ord.compare(m, tm) != std::cmp::Ordering::Greater => {}
                _ => target = Some((m.clone(), c.clone())),
            }
        }
        let (mono, coef) = match target {
            None => break,
            Some(t) => t,
        };
        // applicable reducer with the smallest leading monomial
        let mut pick: Option<usize> = None;
        for (k, rd) in reds.iter().enumerate() {
            if !rd.lm.divides(&mono, layout) {
                continue;
            }
            pick = match pick {
                None => Some(k),
                Some(j) => {
                    if ord.compare(&reds[j].lm, &rd.lm) == std::cmp::Ordering::Greater {
                        Some(k)
                    } else {
                        Some(j)
                    }
                }
            };
        }
        let k = pick.expect("reducible monomial has a reducer");
        let factor = field.div(&coef, &reds[k].lc)?;
        let mult = reds[k].lm.quotient(&mono);
        let mover = WeylElement::monomial_term(sig, mult.clone(), factor.clone());
        r = r.sub(&multiply(&mover, reds[k].elem)?);
        quotients[orig_of[k]].push((mult, factor));
    }
    Ok((r, quotients))
}

/// The S-pair `m1 g1 / lc1 - m2 g2 / lc2`, or `None` when the leading
/// positions (or `T`-levels) differ. Multipliers are commutative monomials
/// in the scalar variables; the product runs through the Weyl rules, so
/// commutator tails appear.
pub fn s_pair(
    g1: &WeylElement,
    g2: &WeylElement,
    ord: &CompiledOrder,
) -> Result<Option<WeylElement>> {
    let sig = g1.sig();
    let field = sig.coef_field();
    let (lm1, lc1) = ord.leading_term(g1)?;
    let (lm2, lc2) = ord.leading_term(g2)?;
    if lm1.pos != lm2.pos || lm1.t_exp(sig.layout()) != lm2.t_exp(sig.layout()) {
        return Ok(None);
    }
    let lcm = lm1.lcm(lm2);
    let m1 = lm1.quotient(&lcm);
    let m2 = lm2.quotient(&lcm);
    let a = multiply(
        &WeylElement::monomial_term(sig, m1, field.inv(lc1)?),
        g1,
    )?;
    let b = multiply(
        &WeylElement::monomial_term(sig, m2, field.inv(lc2)?),
        g2,
    )?;
    Ok(Some(a.sub(&b)))
}

/// Scales an element by a unit of the coefficient field into a canonical
/// primitive form: denominators cleared, content removed, and the leading
/// coefficient sign-normalized. Used to keep coefficient growth in check
/// during reductions; the generated module is unchanged.
pub fn unit_normalize(elem: &WeylElement, ord: &CompiledOrder) -> WeylElement {
    if elem.is_zero() {
        return elem.clone();
    }
    let field = elem.sig().coef_field();
    let factor = match &field.ring {
        None => scalar_factor(elem, ord, field),
        Some(_) => ratfun_factor(elem, ord, field),
    };
    elem.scale(&factor)
}

fn scalar_factor(elem: &WeylElement, ord: &CompiledOrder, field: &CoefField) -> Coef {
    match field.base {
        crate::scalar::BaseField::Prime(_) => {
            let (_, lc) = ord.leading_term(elem).expect("nonzero");
            field.inv(lc).expect("nonzero lc")
        }
        crate::scalar::BaseField::Rationals => {
            let mut den_lcm = BigInt::one();
            let mut num_gcd = BigInt::zero();
            for (_, c) in elem.terms() {
                if let Coef::S(Scalar::Q(q)) = c {
                    den_lcm = den_lcm.lcm(q.denom());
                    num_gcd = num_gcd.gcd(q.numer());
                }
            }
            if num_gcd.is_zero() {
                num_gcd = BigInt::one();
            }
            let mut f = BigRational::new(den_lcm, num_gcd);
            if f.is_negative() {
                f = -f;
            }
            let (_, lc) = ord.leading_term(elem).expect("nonzero");
            if let Coef::S(Scalar::Q(q)) = lc {
                if q.is_negative() {
                    f = -f;
                }
            }
            Coef::S(Scalar::Q(f))
        }
    }
}

fn ratfun_factor(elem: &WeylElement, ord: &CompiledOrder, field: &CoefField) -> Coef {
    let ring = field.ring.as_ref().unwrap();
    let mut den_lcm = MultiPoly::one(ring);
    for (_, c) in elem.terms() {
        if let Coef::R(r) = c {
            den_lcm = gcd::lcm(&den_lcm, r.den());
        }
    }
    // numerators after clearing denominators
    let mut content = MultiPoly::zero(ring);
    let mut lead_num: Option<MultiPoly> = None;
    let (lm, _) = ord.leading_term(elem).expect("nonzero");
    for (m, c) in elem.terms() {
        if let Coef::R(r) = c {
            let n = r
                .num()
                .mul(&den_lcm.exact_div(r.den()).expect("lcm divides"));
            content = gcd::gcd(&content, &n);
            if m == lm {
                lead_num = Some(n);
            }
        }
    }
    if content.is_zero() {
        content = MultiPoly::one(ring);
    }
    // scalar cleanup: make the (poly) coefficients canonical over the base
    let lead = lead_num
        .expect("leading term present")
        .exact_div(&content)
        .expect("content divides");
    let s = match ring.field {
        crate::scalar::BaseField::Prime(_) => {
            let lc = lead.grevlex_lc().expect("nonzero").clone();
            MultiPoly::constant(ring, ring.field.inv(&lc).expect("nonzero"))
        }
        crate::scalar::BaseField::Rationals => {
            let mut den_l = BigInt::one();
            let mut num_g = BigInt::zero();
            for (_, c) in elem.terms() {
                if let Coef::R(r) = c {
                    let n = r
                        .num()
                        .mul(&den_lcm.exact_div(r.den()).expect("lcm divides"))
                        .exact_div(&content)
                        .expect("content divides");
                    for (_, s) in n.terms() {
                        if let Scalar::Q(q) = s {
                            den_l = den_l.lcm(q.denom());
                            num_g = num_g.gcd(q.numer());
                        }
                    }
                }
            }
            if num_g.is_zero() {
                num_g = BigInt::one();
            }
            let mut f = BigRational::new(den_l, num_g);
            if let Some(Scalar::Q(q)) = lead.grevlex_lc() {
                if q.is_negative() {
                    f = -f;
                }
            }
            MultiPoly::constant(ring, Scalar::Q(f))
        }
    };
    Coef::R(
        RatFun::new(den_lcm.mul(&s), content).expect("nonzero content"),
    )
}

struct Item {
    elem: WeylElement,
    lm: Monomial,
    cert: Option<Vec<WeylElement>>,
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    age: usize,
}

/// A reduced Gröbner basis of the left module generated by `gens`.
pub fn buchberger(
    gens: &[WeylElement],
    order: &OrderSpec,
    config: &EngineConfig,
) -> Result<GroebnerBasis> {
    let gens_pos = position_generators(gens)?;
    let sig = gens_pos
        .first()
        .map(|g| g.sig().clone())
        .ok_or_else(|| Error::invalid("buchberger needs at least one generator"))?;
    let ord = order.compile(&sig)?;
    let mut guard = Guard::new(&config.budget);
    let n_inputs = gens_pos.len();

    let mut items: Vec<Item> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut age = 0usize;

    let push_item = |items: &mut Vec<Item>,
                     pairs: &mut Vec<Pair>,
                     age: &mut usize,
                     elem: WeylElement,
                     cert: Option<Vec<WeylElement>>,
                     ord: &CompiledOrder|
     -> Result<()> {
        let lm = ord.leading_monomial(&elem)?.clone();
        let t = items.len();
        let layout = elem.sig().layout().clone();
        // Gebauer-Möller-style update, lcm-divisibility rules only
        pairs.retain(|p| {
            if !lm.divides(&p.lcm, &layout) {
                return true;
            }
            let lcm_it = items[p.i].lm.lcm(&lm);
            let lcm_jt = items[p.j].lm.lcm(&lm);
            lcm_it == p.lcm || lcm_jt == p.lcm
        });
        let mut cands: Vec<(usize, Monomial)> = items
            .iter()
            .enumerate()
            .filter(|(_, it)| {
                it.lm.pos == lm.pos && it.lm.t_exp(&layout) == lm.t_exp(&layout)
            })
            .map(|(i, it)| (i, it.lm.lcm(&lm)))
            .collect();
        cands.sort_by(|a, b| ord.compare(&a.1, &b.1).then(a.0.cmp(&b.0)));
        let mut kept: Vec<(usize, Monomial)> = Vec::new();
        for (i, lcm) in cands {
            if kept.iter().any(|(_, k)| k.divides(&lcm, &layout)) {
                continue;
            }
            kept.push((i, lcm));
        }
        for (i, lcm) in kept {
            pairs.push(Pair {
                i,
                j: t,
                lcm,
                age: *age,
            });
            *age += 1;
        }
        items.push(Item { elem, lm, cert });
        Ok(())
    };

    for (k, g) in gens_pos.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let elem = unit_normalize(g, &ord);
        let cert = if config.track_certificates {
            // elem = u * gens[k] for the normalizing unit u
            let u = unit_of(&elem, g);
            let mut c = vec![WeylElement::zero(&sig); n_inputs];
            c[k] = WeylElement::constant(&sig, u);
            Some(c)
        } else {
            None
        };
        push_item(&mut items, &mut pairs, &mut age, elem, cert, &ord)?;
    }

    while !pairs.is_empty() {
        guard.pairs_done += 1;
        let live: usize = items.iter().map(|it| it.elem.term_count()).sum();
        if let Err(kind) = guard.check(live) {
            return Err(Error::BudgetExceeded {
                kind,
                pairs: guard.pairs_done,
                partial: items.into_iter().map(|it| it.elem).collect(),
            });
        }
        // normal strategy: minimal lcm, then age
        let best = pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| ord.compare(&a.lcm, &b.lcm).then(a.age.cmp(&b.age)))
            .map(|(idx, _)| idx)
            .unwrap();
        let pair = pairs.swap_remove(best);
        let (i, j) = (pair.i, pair.j);
        let spoly = match s_pair(&items[i].elem, &items[j].elem, &ord)? {
            Some(s) => s,
            None => continue,
        };
        if spoly.is_zero() {
            continue;
        }
        let reducers: Vec<WeylElement> = items.iter().map(|it| it.elem.clone()).collect();
        let (nf, quots) = reduce_full(&spoly, &reducers, &ord, Some(&guard))?;
        if nf.is_zero() {
            continue;
        }
        let normalized = unit_normalize(&nf, &ord);
        let cert = if config.track_certificates {
            let field = sig.coef_field();
            // cert(S) from the pair, minus the reduction quotients
            let (lm1, lc1) = ord.leading_term(&items[i].elem)?;
            let (lm2, lc2) = ord.leading_term(&items[j].elem)?;
            let lcm = lm1.lcm(lm2);
            let m1 = WeylElement::monomial_term(&sig, lm1.quotient(&lcm), field.inv(lc1)?);
            let m2 = WeylElement::monomial_term(&sig, lm2.quotient(&lcm), field.inv(lc2)?);
            let mut cert = combine_cert(&sig, &items[i], &m1)?;
            let neg = combine_cert(&sig, &items[j], &m2)?;
            for (a, b) in cert.iter_mut().zip(neg.into_iter()) {
                *a = a.sub(&b);
            }
            for (item, quot) in items.iter().zip(quots.iter()) {
                for (mono, coef) in quot {
                    let mover = WeylElement::monomial_term(&sig, mono.clone(), coef.clone());
                    let scaled = combine_cert(&sig, item, &mover)?;
                    for (a, b) in cert.iter_mut().zip(scaled.into_iter()) {
                        *a = a.sub(&b);
                    }
                }
            }
            // account for the normalization unit
            let u = unit_of(&normalized, &nf);
            let uelem = WeylElement::constant(&sig, u);
            for c in cert.iter_mut() {
                if !c.is_zero() {
                    *c = multiply(&uelem, c)?;
                }
            }
            Some(cert)
        } else {
            None
        };
        push_item(&mut items, &mut pairs, &mut age, normalized, cert, &ord)?;
    }

    let (elements, certificates) = interreduce_items(items, &ord, config.track_certificates)?;

    // postcondition: every input generator reduces to zero
    for g in &gens_pos {
        if !normal_form(g, &elements, &ord)?.is_zero() {
            return Err(Error::invalid(
                "internal error: input generator does not reduce to zero against the basis",
            ));
        }
    }

    Ok(GroebnerBasis {
        sig,
        order: order.clone(),
        elements,
        reduced: true,
        certificates,
    })
}

/// The unit `u` with `scaled = u * base`, read off the leading coefficients.
fn unit_of(scaled: &WeylElement, base: &WeylElement) -> Coef {
    let field = base.sig().coef_field();
    // any common monomial works; take the structurally first
    let (m, c) = base.terms().next().expect("nonzero");
    let c2 = scaled
        .terms()
        .find(|(m2, _)| *m2 == m)
        .map(|(_, c2)| c2.clone())
        .expect("same support");
    field.div(&c2, c).expect("nonzero coefficient")
}

fn combine_cert(
    sig: &Arc<AlgebraSignature>,
    item: &Item,
    mover: &WeylElement,
) -> Result<Vec<WeylElement>> {
    let cert = item.cert.as_ref().expect("certificates tracked");
    let mut out = Vec::with_capacity(cert.len());
    for q in cert {
        if q.is_zero() {
            out.push(WeylElement::zero(sig));
        } else {
            out.push(multiply(mover, q)?);
        }
    }
    Ok(out)
}

fn interreduce_items(
    mut items: Vec<Item>,
    ord: &CompiledOrder,
    track: bool,
) -> Result<(Vec<WeylElement>, Option<Vec<Vec<WeylElement>>>)> {
    let sig = match items.first() {
        None => return Ok((vec![], if track { Some(vec![]) } else { None })),
        Some(it) => it.elem.sig().clone(),
    };
    let field = sig.coef_field();
    loop {
        let mut changed = false;
        let mut idx = 0;
        while idx < items.len() {
            let reducers: Vec<WeylElement> = items
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != idx)
                .map(|(_, it)| it.elem.clone())
                .collect();
            let (nf, quots) = reduce_full(&items[idx].elem, &reducers, ord, None)?;
            if nf == items[idx].elem {
                idx += 1;
                continue;
            }
            changed = true;
            let new_cert = if track {
                let mut cert = items[idx].cert.clone().expect("tracked");
                // quotients are indexed over the reducer list, which skips idx
                let others: Vec<usize> = (0..items.len()).filter(|&k| k != idx).collect();
                for (qi, &k) in others.iter().enumerate() {
                    for (mono, coef) in &quots[qi] {
                        let mover =
                            WeylElement::monomial_term(&sig, mono.clone(), coef.clone());
                        let scaled = combine_cert(&sig, &items[k], &mover)?;
                        for (a, b) in cert.iter_mut().zip(scaled.into_iter()) {
                            *a = a.sub(&b);
                        }
                    }
                }
                Some(cert)
            } else {
                None
            };
            if nf.is_zero() {
                items.remove(idx);
            } else {
                let normalized = unit_normalize(&nf, ord);
                let cert = if track {
                    let u = unit_of(&normalized, &nf);
                    let uelem = WeylElement::constant(&sig, u);
                    let mut cert = new_cert.unwrap();
                    for c in cert.iter_mut() {
                        if !c.is_zero() {
                            *c = multiply(&uelem, c)?;
                        }
                    }
                    Some(cert)
                } else {
                    None
                };
                items[idx] = Item {
                    lm: ord.leading_monomial(&normalized)?.clone(),
                    elem: normalized,
                    cert,
                };
                idx += 1;
            }
        }
        if !changed {
            break;
        }
    }
    // monic leading coefficients
    for it in items.iter_mut() {
        let (_, lc) = ord.leading_term(&it.elem)?;
        if !lc.is_one() {
            let inv = field.inv(lc)?;
            it.elem = it.elem.scale(&inv);
            if track {
                let uelem = WeylElement::constant(&sig, inv);
                for c in it.cert.as_mut().unwrap().iter_mut() {
                    if !c.is_zero() {
                        *c = multiply(&uelem, c)?;
                    }
                }
            }
        }
    }
    items.sort_by(|a, b| ord.compare(&a.lm, &b.lm));
    let certs = if track {
        Some(items.iter().map(|it| it.cert.clone().unwrap()).collect())
    } else {
        None
    };
    Ok((items.into_iter().map(|it| it.elem).collect(), certs))
}

/// Pairwise lm-non-divisible, fully tail-reduced, monic generators of the
/// same module.
pub fn interreduce(gens: &[WeylElement], order: &OrderSpec) -> Result<Vec<WeylElement>> {
    let gens = position_generators(gens)?;
    let sig = match gens.iter().find(|g| !g.is_zero()) {
        None => return Ok(vec![]),
        Some(g) => g.sig().clone(),
    };
    let ord = order.compile(&sig)?;
    let items: Vec<Item> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| {
            let elem = unit_normalize(g, &ord);
            Ok(Item {
                lm: ord.leading_monomial(&elem)?.clone(),
                elem,
                cert: None,
            })
        })
        .collect::<Result<_>>()?;
    let (elements, _) = interreduce_items(items, &ord, false)?;
    Ok(elements)
}

/// True iff the normal form against the basis vanishes.
pub fn module_membership(p: &WeylElement, gb: &GroebnerBasis) -> Result<bool> {
    let p = if p.is_zero() || !p.is_scalar() {
        p.clone()
    } else if gb.sig.rank() == 1 {
        p.at_position(1)?
    } else {
        return Err(Error::invalid("scalar element in a higher-rank module"));
    };
    let ord = gb.compiled()?;
    Ok(normal_form(&p, &gb.elements, &ord)?.is_zero())
}

/// Finite-rank test: re-expresses the generators over the fully rational
/// signature, computes a Gröbner basis there, and checks that the staircase
/// of derivative monomials is finite per position; the total staircase size
/// is the rank.
pub fn is_finite_rank(
    gens: &[WeylElement],
    config: &EngineConfig,
) -> Result<(bool, Option<usize>)> {
    let gens = position_generators(gens)?;
    let sig = gens
        .first()
        .map(|g| g.sig().clone())
        .ok_or_else(|| Error::invalid("finite-rank test needs generators"))?;
    let rsig = sig.rationalized()?;
    let rgens: Vec<WeylElement> = gens
        .iter()
        .map(|g| g.rationalize(&rsig))
        .collect::<Result<_>>()?;
    let order = OrderSpec::default_for(&rsig);
    let gb = buchberger(&rgens, &order, config)?;
    let ord = gb.compiled()?;
    let nd = rsig.layout().derivs.len();
    let mut total = 0usize;
    for pos in 1..=rsig.rank() {
        let lms: Vec<Monomial> = gb
            .elements
            .iter()
            .map(|g| ord.leading_monomial(g).map(|m| m.clone()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|m| m.pos == pos)
            .collect();
        if lms.is_empty() {
            return Ok((false, None));
        }
        if lms.iter().any(|m| m.is_unit()) {
            continue; // unit at this position: empty staircase
        }
        // each axis needs a pure power among the leading monomials
        let mut bounds = vec![None; nd];
        for m in &lms {
            let support: Vec<usize> = (0..nd).filter(|&d| m.exps[d] > 0).collect();
            if support.len() == 1 {
                let d = support[0];
                let e = m.exps[d];
                bounds[d] = Some(bounds[d].map_or(e, |b: u16| b.min(e)));
            }
        }
        if bounds.iter().any(|b| b.is_none()) {
            return Ok((false, None));
        }
        let bounds: Vec<u16> = bounds.into_iter().map(|b| b.unwrap()).collect();
        let cells: usize = bounds.iter().map(|&b| b as usize).product();
        if cells > 4_000_000 {
            return Err(Error::invalid("staircase too large to enumerate"));
        }
        // count monomials below the bounds not divisible by any lm
        let mut count = 0usize;
        let mut cursor = vec![0u16; nd];
        'cells: loop {
            let mut mono = Monomial::unit(&rsig, pos);
            for d in 0..nd {
                mono.exps[d] = cursor[d];
            }
            if !lms.iter().any(|m| m.divides(&mono, rsig.layout())) {
                count += 1;
            }
            // advance the mixed-radix counter
            for d in 0..nd {
                cursor[d] += 1;
                if cursor[d] < bounds[d] {
                    continue 'cells;
                }
                cursor[d] = 0;
            }
            break;
        }
        total += count;
    }
    Ok((true, Some(total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BaseField;
    use crate::weyl::DerivTarget;

    fn sig_x() -> Arc<AlgebraSignature> {
        AlgebraSignature::weyl_poly(BaseField::Rationals, &["x"], 1).unwrap()
    }

    fn sig_xy() -> Arc<AlgebraSignature> {
        AlgebraSignature::weyl_poly(BaseField::Rationals, &["x", "y"], 1).unwrap()
    }

    fn dx(sig: &Arc<AlgebraSignature>) -> WeylElement {
        WeylElement::deriv(sig, DerivTarget::Poly(0)).unwrap()
    }

    fn cfg() -> EngineConfig {
        EngineConfig {
            track_certificates: true,
            ..Default::default()
        }
    }

    fn g1g2(sig: &Arc<AlgebraSignature>) -> (WeylElement, WeylElement) {
        let f = {
            let x = WeylElement::poly_var(sig, 0);
            let y = WeylElement::poly_var(sig, 1);
            multiply(&x, &x)
                .unwrap()
                .sub(&multiply(&y, &multiply(&y, &y).unwrap()).unwrap())
        };
        let dy = WeylElement::deriv(sig, DerivTarget::Poly(1)).unwrap();
        (
            multiply(&dx(sig), &f).unwrap(),
            multiply(&dy, &f).unwrap(),
        )
    }

    #[test]
    fn normal_form_examples() {
        let sig = sig_x();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let x = WeylElement::poly_var(&sig, 0);
        let xdx1 = multiply(&dx(&sig), &x).unwrap().at_position(1).unwrap();
        // an element reduces to zero against itself
        assert!(normal_form(&xdx1, &[xdx1.clone()], &ord).unwrap().is_zero());
        // lm(x) = x does not divide Dx
        let d = dx(&sig).at_position(1).unwrap();
        let xp = x.at_position(1).unwrap();
        assert_eq!(normal_form(&d, &[xp.clone()], &ord).unwrap(), d);
        // the unit reduces everything
        let e1 = WeylElement::basis_vector(&sig, 1).unwrap();
        assert!(normal_form(&xdx1, &[e1], &ord).unwrap().is_zero());
    }

    #[test]
    fn normal_form_idempotent() {
        let sig = sig_xy();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let (a, b) = g1g2(&sig);
        let reducers = vec![a.at_position(1).unwrap()];
        let p = multiply(&b, &b).unwrap().at_position(1).unwrap();
        let n1 = normal_form(&p, &reducers, &ord).unwrap();
        let n2 = normal_form(&n1, &reducers, &ord).unwrap();
        assert_eq!(n1, n2);
    }

    #[test]
    fn s_pair_x_dx_is_unit() {
        let sig = sig_x();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let xe = WeylElement::poly_var(&sig, 0).at_position(1).unwrap();
        let de = dx(&sig).at_position(1).unwrap();
        let s = s_pair(&xe, &de, &ord).unwrap().unwrap();
        assert_eq!(s, WeylElement::basis_vector(&sig, 1).unwrap());
    }

    #[test]
    fn s_pair_positions_differ() {
        let sig = AlgebraSignature::weyl_poly(BaseField::Rationals, &["x", "y"], 2).unwrap();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let a = WeylElement::poly_var(&sig, 0).at_position(1).unwrap();
        let b = WeylElement::poly_var(&sig, 1).at_position(2).unwrap();
        assert!(s_pair(&a, &b, &ord).unwrap().is_none());
    }

    #[test]
    fn s_pair_commutative_reduces_to_zero() {
        let sig =
            AlgebraSignature::commutative(BaseField::Rationals, vec!["x".into(), "y".into()], 1)
                .unwrap();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let x = WeylElement::poly_var(&sig, 0);
        let y = WeylElement::poly_var(&sig, 1);
        let x2 = multiply(&x, &x).unwrap().at_position(1).unwrap();
        let xy = multiply(&x, &y).unwrap().at_position(1).unwrap();
        let s = s_pair(&x2, &xy, &ord).unwrap().unwrap();
        assert!(normal_form(&s, &[x2, xy], &ord).unwrap().is_zero());
    }

    #[test]
    fn no_product_criterion_in_weyl_algebras() {
        // coprime leading monomials, yet the ideal is the whole algebra
        let sig = sig_x();
        let gens = vec![WeylElement::poly_var(&sig, 0), dx(&sig)];
        let gb = buchberger(&gens, &OrderSpec::default_for(&sig), &cfg()).unwrap();
        assert_eq!(gb.elements.len(), 1);
        assert_eq!(gb.elements[0], WeylElement::basis_vector(&sig, 1).unwrap());
        assert!(gb.verify_certificates(&gens).unwrap());
        let one = WeylElement::one(&sig);
        assert!(module_membership(&one, &gb).unwrap());
    }

    #[test]
    fn buchberger_commutative_two_vars() {
        let sig =
            AlgebraSignature::commutative(BaseField::Rationals, vec!["x".into(), "y".into()], 1)
                .unwrap();
        let gens = vec![
            WeylElement::poly_var(&sig, 0),
            WeylElement::poly_var(&sig, 1),
        ];
        let gb = buchberger(&gens, &OrderSpec::default_for(&sig), &cfg()).unwrap();
        assert_eq!(gb.elements.len(), 2);
        assert!(gb.verify_certificates(&gens).unwrap());
    }

    #[test]
    fn buchberger_annihilator_pair() {
        let sig = sig_xy();
        let (a, b) = g1g2(&sig);
        let gens = vec![a.clone(), b.clone()];
        let gb = buchberger(&gens, &OrderSpec::default_for(&sig), &cfg()).unwrap();
        assert!(module_membership(&a, &gb).unwrap());
        assert!(module_membership(&b, &gb).unwrap());
        assert!(gb.verify_certificates(&gens).unwrap());
        // the Euler operator only enters after saturation
        let x = WeylElement::poly_var(&sig, 0);
        let y = WeylElement::poly_var(&sig, 1);
        let dy = WeylElement::deriv(&sig, DerivTarget::Poly(1)).unwrap();
        let euler = multiply(&x, &dx(&sig))
            .unwrap()
            .scale_i64(3)
            .add(&multiply(&y, &dy).unwrap().scale_i64(2))
            .add(&WeylElement::from_i64(&sig, 6));
        assert!(!module_membership(&euler, &gb).unwrap());
        // but f * euler = 3x g1 + 2y g2 is in the module
        let f = {
            let x = WeylElement::poly_var(&sig, 0);
            let y = WeylElement::poly_var(&sig, 1);
            multiply(&x, &x)
                .unwrap()
                .sub(&multiply(&y, &multiply(&y, &y).unwrap()).unwrap())
        };
        let feuler = multiply(&f, &euler).unwrap();
        assert!(module_membership(&feuler, &gb).unwrap());
        let direct = multiply(&x, &a)
            .unwrap()
            .scale_i64(3)
            .add(&multiply(&y, &b).unwrap().scale_i64(2));
        assert_eq!(feuler, direct);
    }

    #[test]
    fn spairs_of_final_basis_reduce_to_zero() {
        let sig = sig_xy();
        let (a, b) = g1g2(&sig);
        let gb = buchberger(&vec![a, b], &OrderSpec::default_for(&sig), &cfg()).unwrap();
        let ord = gb.compiled().unwrap();
        for i in 0..gb.elements.len() {
            for j in i + 1..gb.elements.len() {
                if let Some(s) = s_pair(&gb.elements[i], &gb.elements[j], &ord).unwrap() {
                    assert!(normal_form(&s, &gb.elements, &ord).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn interreduce_examples() {
        let sig = sig_x();
        let order = OrderSpec::default_for(&sig);
        let x = WeylElement::poly_var(&sig, 0);
        // {x, 2x} -> {x}
        let r = interreduce(&[x.clone(), x.scale_i64(2)], &order).unwrap();
        assert_eq!(r, vec![x.at_position(1).unwrap()]);
        // {e1} -> {e1}
        let e1 = WeylElement::basis_vector(&sig, 1).unwrap();
        assert_eq!(interreduce(&[e1.clone()], &order).unwrap(), vec![e1.clone()]);
        // {x Dx, x Dx + x}: head reduction exposes x, and Dx x - x Dx = 1,
        // so mutual reduction collapses the pair to the unit
        let xdx = multiply(&x, &dx(&sig)).unwrap();
        let r = interreduce(&[xdx.clone(), xdx.add(&x)], &order).unwrap();
        assert_eq!(r, vec![e1]);
    }

    #[test]
    fn budget_pairs_exceeded_carries_partial() {
        let sig = sig_xy();
        let (a, b) = g1g2(&sig);
        let config = EngineConfig {
            budget: EngineBudget {
                max_pairs: 0,
                ..Default::default()
            },
            track_certificates: false,
        };
        match buchberger(&[a, b], &OrderSpec::default_for(&sig), &config) {
            Err(Error::BudgetExceeded { kind, partial, .. }) => {
                assert_eq!(kind, BudgetKind::Pairs);
                assert_eq!(partial.len(), 2);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn finite_rank_examples() {
        let cfg = EngineConfig::default();
        // {g1, g2}: rank 1
        let sig = sig_xy();
        let (a, b) = g1g2(&sig);
        assert_eq!(is_finite_rank(&[a, b], &cfg).unwrap(), (true, Some(1)));
        // {Dx} with n = 1: rank 1
        let s1 = sig_x();
        assert_eq!(
            is_finite_rank(&[dx(&s1)], &cfg).unwrap(),
            (true, Some(1))
        );
        // {x Dx}: the unit coefficient is invertible rationally
        let x = WeylElement::poly_var(&s1, 0);
        let xdx = multiply(&x, &dx(&s1)).unwrap();
        assert_eq!(is_finite_rank(&[xdx], &cfg).unwrap(), (true, Some(1)));
        // {Dx} with n = 2 is not finite rank
        let s2 = sig_xy();
        assert_eq!(is_finite_rank(&[dx(&s2)], &cfg).unwrap(), (false, None));
    }

    #[test]
    fn unit_normalize_canonical() {
        let sig = sig_xy();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let (a, _) = g1g2(&sig);
        let n1 = unit_normalize(&a, &ord);
        let scaled = a.scale(&sig.coef_field().from_i64(-6));
        let n2 = unit_normalize(&scaled, &ord);
        assert_eq!(n1, n2);
    }
}
