//! (0,1)-initial forms, the initial module, and the singular locus via
//! commutative saturation and elimination.
//!
//! The symbol ring replaces every derivative `D_v` by a commuting variable
//! (`xi_v` for polynomial, `zeta_v` for rational variables); coefficients
//! stay in `K(t)`. The initial module is read off a Gröbner basis under the
//! weight order giving 1 to every derivative, which generates the initial
//! module of the whole submodule by Gröbner deformation.

use std::sync::Arc;

use crate::groebner::{buchberger, EngineConfig};
use crate::order::{ModuleLayer, OrderSpec, TermOrder};
use crate::poly::{zero_exps, Exps};
use crate::weyl::{AlgebraSignature, Monomial, PolyX, WeylElement};
use crate::{Error, Result};

/// The commutative symbol signature of a mixed signature, together with the
/// symbol variable names (one per derivative slot).
pub fn symbol_signature(
    sig: &Arc<AlgebraSignature>,
) -> Result<(Arc<AlgebraSignature>, Vec<String>)> {
    if sig.has_localization() {
        return Err(Error::invalid("strip T before taking symbols"));
    }
    let mut vars: Vec<String> = sig.poly_vars().to_vec();
    let mut sym_names = Vec::new();
    for &(_, target) in &sig.layout().derivs {
        let base = match target {
            crate::weyl::DerivTarget::Poly(i) => format!("xi_{}", sig.poly_vars()[i]),
            crate::weyl::DerivTarget::Rational(j) => format!("zeta_{}", sig.rational_vars()[j]),
        };
        let mut name = base;
        while vars.contains(&name) || sig.rational_vars().contains(&name) {
            name.push('_');
        }
        vars.push(name.clone());
        sym_names.push(name);
    }
    let sym = AlgebraSignature::commutative_over(
        sig.base_field(),
        sig.rational_vars().to_vec(),
        vars,
        sig.rank(),
    )?;
    Ok((sym, sym_names))
}

/// Keeps exactly the terms of maximal total derivative degree, with
/// derivatives renamed to their commuting symbols.
pub fn initial_form(p: &WeylElement, sym: &Arc<AlgebraSignature>) -> Result<WeylElement> {
    if p.is_zero() {
        return Err(Error::ZeroElement);
    }
    if !p.is_t_free() {
        return Err(Error::invalid("initial forms are defined for T-free elements"));
    }
    let layout = p.sig().layout();
    let c = p
        .terms()
        .map(|(m, _)| {
            layout
                .derivs
                .iter()
                .map(|&(slot, _)| m.exps[slot] as u32)
                .sum::<u32>()
        })
        .max()
        .unwrap();
    let mut out = WeylElement::zero(sym);
    for (m, coef) in p.terms() {
        let d: u32 = layout
            .derivs
            .iter()
            .map(|&(slot, _)| m.exps[slot] as u32)
            .sum();
        if d != c {
            continue;
        }
        let mut exps = zero_exps(sym.layout().len);
        for i in 0..layout.n_poly {
            exps[i] = m.exps[i];
        }
        for (k, &(slot, _)) in layout.derivs.iter().enumerate() {
            exps[layout.n_poly + k] = m.exps[slot];
        }
        out.add_term(Monomial { exps, pos: m.pos }, coef.clone());
    }
    Ok(out)
}

/// Generators of the initial module of the submodule generated by `gens`:
/// initial forms of a Gröbner basis under the derivative-weight order.
pub fn initial_module(
    gens: &[WeylElement],
    config: &EngineConfig,
) -> Result<(Vec<WeylElement>, Arc<AlgebraSignature>)> {
    let sig = gens
        .first()
        .map(|g| g.sig().clone())
        .ok_or_else(|| Error::invalid("initial module needs generators"))?;
    let (sym, _) = symbol_signature(&sig)?;
    let order = OrderSpec::weight_on_derivatives(&sig);
    let gb = buchberger(gens, &order, config)?;
    let forms = gb
        .elements
        .iter()
        .map(|g| initial_form(g, &sym))
        .collect::<Result<Vec<_>>>()?;
    Ok((forms, sym))
}

fn require_commutative(sig: &AlgebraSignature) -> Result<()> {
    if !sig.layout().derivs.is_empty() || sig.has_localization() {
        return Err(Error::invalid("expected a commutative signature"));
    }
    Ok(())
}

/// Adjoins a fresh tag variable (last polynomial slot) to a commutative
/// signature.
fn adjoin_tag(sig: &Arc<AlgebraSignature>) -> Result<(Arc<AlgebraSignature>, String)> {
    require_commutative(sig)?;
    let mut name = "u".to_string();
    while sig.poly_vars().contains(&name) || sig.rational_vars().contains(&name) {
        name.push('_');
    }
    let mut vars = sig.poly_vars().to_vec();
    vars.push(name.clone());
    let ext = AlgebraSignature::commutative_over(
        sig.base_field(),
        sig.rational_vars().to_vec(),
        vars,
        sig.rank(),
    )?;
    Ok((ext, name))
}

fn lift_to_tagged(e: &WeylElement, ext: &Arc<AlgebraSignature>) -> WeylElement {
    let mut out = WeylElement::zero(ext);
    for (m, c) in e.terms() {
        let mut exps = m.exps.clone();
        exps.push(0);
        out.add_term(Monomial { exps, pos: m.pos }, c.clone());
    }
    out
}

fn drop_tag(e: &WeylElement, sig: &Arc<AlgebraSignature>) -> Result<WeylElement> {
    let last = e.sig().layout().len - 1;
    let mut out = WeylElement::zero(sig);
    for (m, c) in e.terms() {
        if m.exps[last] != 0 {
            return Err(Error::invalid("element still involves the tag variable"));
        }
        let mut exps = m.exps.clone();
        exps.pop();
        out.add_term(Monomial { exps, pos: m.pos }, c.clone());
    }
    Ok(out)
}

/// The elements of a tag-elimination Gröbner basis free of the tag, mapped
/// back to the base signature. By the elimination property they generate
/// the contraction.
fn eliminate_tag(
    gens: &[WeylElement],
    ext: &Arc<AlgebraSignature>,
    sig: &Arc<AlgebraSignature>,
    tag: &str,
    config: &EngineConfig,
) -> Result<Vec<WeylElement>> {
    let order = OrderSpec {
        term: TermOrder::Block(vec![
            TermOrder::Grevlex(vec![tag.to_string()]),
            TermOrder::Grevlex(
                ext.poly_vars()
                    .iter()
                    .filter(|v| *v != tag)
                    .cloned()
                    .collect(),
            ),
        ]),
        module: ModuleLayer::TermOverPosition,
        t_elim: false,
    };
    let gb = buchberger(gens, &order, config)?;
    let ord = gb.compiled()?;
    let last = ext.layout().len - 1;
    let mut kept = Vec::new();
    for g in &gb.elements {
        let lm = ord.leading_monomial(g)?;
        if lm.exps[last] == 0 {
            kept.push(drop_tag(g, sig)?);
        }
    }
    Ok(kept)
}

/// Generators of `A : (g)^infty` via the Rabinowitsch construction: adjoin
/// `u`, add `(u g - 1) e_j` for every position, eliminate `u`.
pub fn saturate_commutative(
    a_gens: &[WeylElement],
    g: &PolyX,
    config: &EngineConfig,
) -> Result<Vec<WeylElement>> {
    let sig = a_gens
        .first()
        .map(|e| e.sig().clone())
        .ok_or_else(|| Error::invalid("saturation needs generators"))?;
    require_commutative(&sig)?;
    if g.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let (ext, tag) = adjoin_tag(&sig)?;
    let mut gens: Vec<WeylElement> = a_gens.iter().map(|e| lift_to_tagged(e, &ext)).collect();
    let u = WeylElement::poly_var(&ext, ext.layout().n_poly - 1);
    let g_ext = lift_to_tagged(&g.to_weyl(&sig), &ext);
    let ug1 = crate::weyl::multiply(&u, &g_ext)?.sub(&WeylElement::one(&ext));
    for j in 1..=sig.rank() {
        gens.push(ug1.at_position(j)?);
    }
    eliminate_tag(&gens, &ext, &sig, &tag, config)
}

/// Generators of `A ∩ B` via the tag construction `u A + (1-u) B`.
pub fn module_intersection(
    a_gens: &[WeylElement],
    b_gens: &[WeylElement],
    config: &EngineConfig,
) -> Result<Vec<WeylElement>> {
    let sig = a_gens
        .iter()
        .chain(b_gens.iter())
        .next()
        .map(|e| e.sig().clone())
        .ok_or_else(|| Error::invalid("intersection needs generators"))?;
    require_commutative(&sig)?;
    let (ext, tag) = adjoin_tag(&sig)?;
    let u = WeylElement::poly_var(&ext, ext.layout().n_poly - 1);
    let one_minus_u = WeylElement::one(&ext).sub(&u);
    let mut gens = Vec::new();
    for a in a_gens {
        gens.push(crate::weyl::multiply(&u, &lift_to_tagged(a, &ext))?);
    }
    for b in b_gens {
        gens.push(crate::weyl::multiply(&one_minus_u, &lift_to_tagged(b, &ext))?);
    }
    eliminate_tag(&gens, &ext, &sig, &tag, config)
}

/// Result of a singular-locus computation: generators of the elimination
/// ideal in `K(t)[x]`. The unit ideal (empty singular locus) is reported as
/// the single constant 1; the zero ideal (whole space) as an empty list.
pub fn singular_locus(gens: &[WeylElement], config: &EngineConfig) -> Result<Vec<PolyX>> {
    let sig = gens
        .first()
        .map(|g| g.sig().clone())
        .ok_or_else(|| Error::invalid("singular locus needs generators"))?;
    if gens.iter().all(|g| g.is_zero()) {
        return Err(Error::invalid("singular locus of the zero module"));
    }
    let (ini, sym) = initial_module(gens, config)?;
    let field = sym.coef_field().clone();
    let n_x = sig.layout().n_poly;
    let n_sym = sym.layout().n_poly;

    // saturate by every symbol variable, then intersect
    let mut saturated: Option<Vec<WeylElement>> = None;
    for idx in n_x..n_sym {
        let var = PolyX::var(&field, n_sym, idx);
        let sat = saturate_commutative(&ini, &var, config)?;
        saturated = Some(match saturated {
            None => sat,
            Some(prev) => module_intersection(&prev, &sat, config)?,
        });
    }
    let saturated = saturated.unwrap_or(ini);

    let per_position: Vec<Vec<WeylElement>> = if sym.rank() == 1 {
        vec![saturated]
    } else {
        let mut per = Vec::new();
        for pos in 1..=sym.rank() {
            per.push(contract_position(&saturated, &sym, pos, config)?);
        }
        per
    };

    let mut ideal: Option<Vec<PolyX>> = None;
    for gens_pos in per_position {
        let part = eliminate_symbols(&gens_pos, &sym, n_x, config)?;
        ideal = Some(match ideal {
            None => part,
            Some(prev) => intersect_x_ideals(&prev, &part, &sig, config)?,
        });
    }
    let mut out = ideal.unwrap_or_default();
    if out.iter().any(|p| p.is_constant() && !p.is_zero()) {
        out = vec![PolyX::one(&field, n_x)];
    }
    Ok(out)
}

/// Pure position-`pos` elements of the module, as a rank-1 system.
fn contract_position(
    gens: &[WeylElement],
    sym: &Arc<AlgebraSignature>,
    pos: u32,
    config: &EngineConfig,
) -> Result<Vec<WeylElement>> {
    let mut priority: Vec<u32> = (1..=sym.rank()).filter(|&p| p != pos).collect();
    priority.push(pos);
    let order = OrderSpec::default_for(sym).with_position_priority(priority);
    let gb = buchberger(gens, &order, config)?;
    let ord = gb.compiled()?;
    let rank1 = AlgebraSignature::commutative_over(
        sym.base_field(),
        sym.rational_vars().to_vec(),
        sym.poly_vars().to_vec(),
        1,
    )?;
    let mut kept = Vec::new();
    for g in &gb.elements {
        if ord.leading_monomial(g)?.pos == pos {
            // with pos least significant, such elements are pure e_pos
            debug_assert!(g.terms().all(|(m, _)| m.pos == pos));
            let comp = g.component(pos);
            let mut lifted = WeylElement::zero(&rank1);
            for (m, c) in comp.terms() {
                lifted.add_term(
                    Monomial {
                        exps: m.exps.clone(),
                        pos: 1,
                    },
                    c.clone(),
                );
            }
            kept.push(lifted);
        }
    }
    Ok(kept)
}

/// Keeps the symbol-free part of a rank-1 ideal in the symbol ring, as
/// polynomials in the base `x` variables.
fn eliminate_symbols(
    gens: &[WeylElement],
    sym: &Arc<AlgebraSignature>,
    n_x: usize,
    config: &EngineConfig,
) -> Result<Vec<PolyX>> {
    if gens.is_empty() {
        return Ok(vec![]);
    }
    let sym_vars: Vec<String> = sym.poly_vars()[n_x..].to_vec();
    let order = OrderSpec::eliminating(sym, &sym_vars);
    let gb = buchberger(gens, &order, config)?;
    let ord = gb.compiled()?;
    let mut out = Vec::new();
    for g in &gb.elements {
        let lm = ord.leading_monomial(g)?;
        if lm.exps[n_x..].iter().all(|&e| e == 0) {
            let p = g.component(lm.pos).to_polyx()?;
            let trimmed = PolyX {
                n_poly: n_x,
                terms: p
                    .terms
                    .iter()
                    .map(|(e, c)| {
                        let short: Exps = e[..n_x].iter().copied().collect();
                        (short, c.clone())
                    })
                    .collect(),
            };
            out.push(trimmed);
        }
    }
    Ok(out)
}

/// Intersection of two ideals in `K(t)[x]`, returned as polynomials.
fn intersect_x_ideals(
    a: &[PolyX],
    b: &[PolyX],
    sig: &Arc<AlgebraSignature>,
    config: &EngineConfig,
) -> Result<Vec<PolyX>> {
    if a.is_empty() || b.is_empty() {
        return Ok(vec![]);
    }
    let xring = AlgebraSignature::commutative_over(
        sig.base_field(),
        sig.rational_vars().to_vec(),
        sig.poly_vars().to_vec(),
        1,
    )?;
    let lift = |ps: &[PolyX]| -> Result<Vec<WeylElement>> {
        ps.iter().map(|p| p.to_weyl(&xring).at_position(1)).collect()
    };
    let meet = module_intersection(&lift(a)?, &lift(b)?, config)?;
    meet.iter().map(|e| e.component(1).to_polyx()).collect()
}

/// A single polynomial vanishing on the singular locus: the product of the
/// generators. The unit ideal yields the constant 1 (the closure is then
/// the input itself); the zero ideal is rejected as not finite rank.
pub fn pick_loc_poly(sing_gens: &[PolyX], field: &crate::coef::CoefField) -> Result<PolyX> {
    if sing_gens.is_empty() {
        return Err(Error::NotFiniteRank(
            "the singular locus is the whole space".into(),
        ));
    }
    if sing_gens.iter().any(|p| p.is_constant() && !p.is_zero()) {
        return Ok(PolyX::one(field, sing_gens[0].n_poly));
    }
    let mut acc = PolyX::one(field, sing_gens[0].n_poly);
    for p in sing_gens {
        acc = acc.mul(field, p);
    }
    Ok(acc)
}
