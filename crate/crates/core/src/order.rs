//! Monomial and module orders: grevlex, lex, block, weight-refined orders,
//! position handling, and the `T`-elimination dominance required by the
//! closure algorithm.
//!
//! Admissibility here means: the unit monomial is minimal, comparison is
//! compatible with (commutative) monomial multiplication, and any proper
//! divisor is strictly smaller. The last property is what makes such orders
//! usable for Weyl algebras, since commutator tails are proper divisors of
//! the leading monomial.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::weyl::{AlgebraSignature, Monomial, WeylElement};
use crate::{Error, Result};

/// Order on the scalar monomial variables, by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermOrder {
    Grevlex(Vec<String>),
    Lex(Vec<String>),
    Block(Vec<TermOrder>),
    Weight {
        weights: Vec<(String, i64)>,
        tie: Box<TermOrder>,
    },
}

/// How positions interact with the term order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleLayer {
    /// Positions compared first; by default smaller positions are greater.
    /// An explicit priority list (most significant first) may reorder them.
    PositionOverTerm { priority: Option<Vec<u32>> },
    /// Term order first, smaller position wins ties.
    TermOverPosition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSpec {
    pub term: TermOrder,
    pub module: ModuleLayer,
    /// When set, any monomial containing `T` dominates every `T`-free one.
    pub t_elim: bool,
}

impl OrderSpec {
    /// Grevlex over all monomial variables in declaration order,
    /// position-over-term; `T`-elimination when the signature is localized.
    pub fn default_for(sig: &AlgebraSignature) -> OrderSpec {
        OrderSpec {
            term: TermOrder::Grevlex(sig.monomial_var_names()),
            module: ModuleLayer::PositionOverTerm { priority: None },
            t_elim: sig.has_localization(),
        }
    }

    /// Weight 1 on every derivative, 0 elsewhere, grevlex tie-break.
    pub fn weight_on_derivatives(sig: &AlgebraSignature) -> OrderSpec {
        let names = sig.monomial_var_names();
        let weights = names
            .iter()
            .map(|n| (n.clone(), if n.starts_with('D') { 1 } else { 0 }))
            .collect();
        OrderSpec {
            term: TermOrder::Weight {
                weights,
                tie: Box::new(TermOrder::Grevlex(names)),
            },
            module: ModuleLayer::PositionOverTerm { priority: None },
            t_elim: sig.has_localization(),
        }
    }

    /// Block order eliminating `front`: any monomial meeting `front`
    /// dominates all others, across positions.
    pub fn eliminating(sig: &AlgebraSignature, front: &[String]) -> OrderSpec {
        let rest: Vec<String> = sig
            .monomial_var_names()
            .into_iter()
            .filter(|n| !front.contains(n))
            .collect();
        OrderSpec {
            term: TermOrder::Block(vec![
                TermOrder::Grevlex(front.to_vec()),
                TermOrder::Grevlex(rest),
            ]),
            module: ModuleLayer::TermOverPosition,
            t_elim: sig.has_localization(),
        }
    }

    /// `lex(x...) > lex(D...)`, the classical elimination order.
    pub fn lex_elimination(sig: &AlgebraSignature) -> OrderSpec {
        let names = sig.monomial_var_names();
        let (xs, ds): (Vec<String>, Vec<String>) =
            names.into_iter().partition(|n| !n.starts_with('D'));
        OrderSpec {
            term: TermOrder::Block(vec![TermOrder::Lex(xs), TermOrder::Lex(ds)]),
            module: ModuleLayer::PositionOverTerm { priority: None },
            t_elim: sig.has_localization(),
        }
    }

    pub fn with_position_priority(mut self, priority: Vec<u32>) -> OrderSpec {
        self.module = ModuleLayer::PositionOverTerm {
            priority: Some(priority),
        };
        self
    }

    pub fn compile(&self, sig: &Arc<AlgebraSignature>) -> Result<CompiledOrder> {
        let names = sig.monomial_var_names();
        let resolve = |n: &str| -> Result<usize> {
            names
                .iter()
                .position(|v| v == n)
                .ok_or_else(|| Error::InvalidOrder(format!("unknown monomial variable `{n}`")))
        };
        // slot index for each monomial variable name, skipping the T slot
        let slot_of = |i: usize| -> usize {
            let layout = sig.layout();
            if i < layout.n_poly {
                i
            } else {
                layout.derivs[i - layout.n_poly].0
            }
        };
        let prog = compile_term(&self.term, &resolve, &slot_of)?;
        let mut covered = vec![0usize; names.len()];
        cover(&prog, sig, &mut covered);
        if covered.iter().any(|&c| c != 1) {
            let missing: Vec<&String> = names
                .iter()
                .zip(covered.iter())
                .filter(|(_, &c)| c != 1)
                .map(|(n, _)| n)
                .collect();
            return Err(Error::InvalidOrder(format!(
                "every monomial variable must be covered exactly once (check {:?})",
                missing
            )));
        }
        if sig.has_localization() && !self.t_elim {
            return Err(Error::InvalidOrder(
                "localized signatures require a T-eliminating order".into(),
            ));
        }
        let pos_rank = match &self.module {
            ModuleLayer::PositionOverTerm {
                priority: Some(priority),
            } => {
                if priority.len() != sig.rank() as usize
                    || (1..=sig.rank()).any(|p| !priority.contains(&p))
                {
                    return Err(Error::InvalidOrder(
                        "position priority must be a permutation of 1..=rank".into(),
                    ));
                }
                let mut rank = vec![0u32; sig.rank() as usize + 1];
                for (r, &p) in priority.iter().enumerate() {
                    rank[p as usize] = r as u32;
                }
                Some(rank)
            }
            _ => None,
        };
        Ok(CompiledOrder {
            sig: sig.clone(),
            spec: self.clone(),
            t_slot: if self.t_elim { sig.layout().t_slot } else { None },
            prog,
            pos_rank,
        })
    }
}

impl std::fmt::Display for OrderSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.t_elim {
            write!(f, "T > ")?;
        }
        write!(f, "{}", self.term)
    }
}

impl std::fmt::Display for TermOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TermOrder::Grevlex(vs) => write!(f, "grevlex({})", vs.join(",")),
            TermOrder::Lex(vs) => write!(f, "lex({})", vs.join(",")),
            TermOrder::Block(bs) => {
                let parts: Vec<String> = bs.iter().map(|b| b.to_string()).collect();
                write!(f, "{}", parts.join(" > "))
            }
            TermOrder::Weight { weights, tie } => {
                let ws: Vec<String> = weights
                    .iter()
                    .filter(|(_, w)| *w != 0)
                    .map(|(n, w)| format!("{n}={w}"))
                    .collect();
                write!(f, "weight({}; {})", ws.join(","), tie)
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Prog {
    Grevlex(Vec<usize>),
    Lex(Vec<usize>),
    Block(Vec<Prog>),
    Weight(Vec<(usize, i64)>, Box<Prog>),
}

fn compile_term(
    t: &TermOrder,
    resolve: &dyn Fn(&str) -> Result<usize>,
    slot_of: &dyn Fn(usize) -> usize,
) -> Result<Prog> {
    Ok(match t {
        TermOrder::Grevlex(vs) => Prog::Grevlex(
            vs.iter()
                .map(|n| resolve(n).map(slot_of))
                .collect::<Result<_>>()?,
        ),
        TermOrder::Lex(vs) => Prog::Lex(
            vs.iter()
                .map(|n| resolve(n).map(slot_of))
                .collect::<Result<_>>()?,
        ),
        TermOrder::Block(bs) => Prog::Block(
            bs.iter()
                .map(|b| compile_term(b, resolve, slot_of))
                .collect::<Result<_>>()?,
        ),
        TermOrder::Weight { weights, tie } => {
            for (_, w) in weights {
                if *w < 0 {
                    return Err(Error::InvalidOrder("weights must be non-negative".into()));
                }
            }
            Prog::Weight(
                weights
                    .iter()
                    .map(|(n, w)| resolve(n).map(|i| (slot_of(i), *w)))
                    .collect::<Result<_>>()?,
                Box::new(compile_term(tie, resolve, slot_of)?),
            )
        }
    })
}

fn cover(p: &Prog, sig: &AlgebraSignature, covered: &mut [usize]) {
    // map slots back to name indices for the coverage check
    let layout = sig.layout();
    let name_idx = |slot: usize| -> usize {
        if slot < layout.n_poly {
            slot
        } else {
            layout.n_poly
                + layout
                    .derivs
                    .iter()
                    .position(|&(s, _)| s == slot)
                    .expect("derivative slot")
        }
    };
    match p {
        Prog::Grevlex(vs) | Prog::Lex(vs) => {
            for &s in vs {
                covered[name_idx(s)] += 1;
            }
        }
        Prog::Block(bs) => bs.iter().for_each(|b| cover(b, sig, covered)),
        // weights do not count as coverage; the tie-break must cover
        Prog::Weight(_, tie) => cover(tie, sig, covered),
    }
}

/// An order resolved against a signature.
#[derive(Debug, Clone)]
pub struct CompiledOrder {
    sig: Arc<AlgebraSignature>,
    spec: OrderSpec,
    t_slot: Option<usize>,
    prog: Prog,
    pos_rank: Option<Vec<u32>>,
}

impl CompiledOrder {
    pub fn sig(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn spec(&self) -> &OrderSpec {
        &self.spec
    }

    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        if let Some(ts) = self.t_slot {
            match a.exps[ts].cmp(&b.exps[ts]) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        match &self.spec.module {
            ModuleLayer::PositionOverTerm { .. } => {
                let ra = self.pos_of(a.pos);
                let rb = self.pos_of(b.pos);
                // smaller rank value means greater monomial
                match rb.cmp(&ra) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
                cmp_prog(&self.prog, &a.exps, &b.exps)
            }
            ModuleLayer::TermOverPosition => match cmp_prog(&self.prog, &a.exps, &b.exps) {
                Ordering::Equal => b.pos.cmp(&a.pos),
                ord => ord,
            },
        }
    }

    fn pos_of(&self, pos: u32) -> u32 {
        match &self.pos_rank {
            Some(rank) => rank[pos as usize],
            None => pos,
        }
    }

    /// The order-maximal term of a nonzero element.
    pub fn leading_term<'a>(&self, p: &'a WeylElement) -> Result<(&'a Monomial, &'a Coef)> {
        p.terms()
            .max_by(|x, y| self.compare(x.0, y.0))
            .ok_or(Error::ZeroElement)
    }

    pub fn leading_monomial<'a>(&self, p: &'a WeylElement) -> Result<&'a Monomial> {
        Ok(self.leading_term(p)?.0)
    }

    /// Terms sorted descending.
    pub fn sorted_terms<'a>(&self, p: &'a WeylElement) -> Vec<(&'a Monomial, &'a Coef)> {
        let mut v: Vec<_> = p.terms().collect();
        v.sort_by(|x, y| self.compare(y.0, x.0));
        v
    }
}

use crate::coef::Coef;

fn cmp_prog(p: &Prog, a: &[u16], b: &[u16]) -> Ordering {
    match p {
        Prog::Grevlex(vs) => {
            let da: u64 = vs.iter().map(|&i| a[i] as u64).sum();
            let db: u64 = vs.iter().map(|&i| b[i] as u64).sum();
            match da.cmp(&db) {
                Ordering::Equal => {}
                ord => return ord,
            }
            for &i in vs.iter().rev() {
                match a[i].cmp(&b[i]) {
                    Ordering::Equal => {}
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                }
            }
            Ordering::Equal
        }
        Prog::Lex(vs) => {
            for &i in vs {
                match a[i].cmp(&b[i]) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
            }
            Ordering::Equal
        }
        Prog::Block(bs) => {
            for sub in bs {
                match cmp_prog(sub, a, b) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
            }
            Ordering::Equal
        }
        Prog::Weight(ws, tie) => {
            let wa: i64 = ws.iter().map(|&(i, w)| a[i] as i64 * w).sum();
            let wb: i64 = ws.iter().map(|&(i, w)| b[i] as i64 * w).sum();
            match wa.cmp(&wb) {
                Ordering::Equal => cmp_prog(tie, a, b),
                ord => ord,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::zero_exps;
    use crate::scalar::BaseField;
    use crate::weyl::{DerivTarget, PolyX};

    fn sig_xy() -> Arc<AlgebraSignature> {
        AlgebraSignature::weyl_poly(BaseField::Rationals, &["x", "y"], 1).unwrap()
    }

    fn mono(sig: &Arc<AlgebraSignature>, exps: &[u16], pos: u32) -> Monomial {
        let mut e = zero_exps(sig.layout().len);
        e[..exps.len()].copy_from_slice(exps);
        Monomial { exps: e, pos }
    }

    #[test]
    fn grevlex_examples() {
        let sig = AlgebraSignature::commutative(
            BaseField::Rationals,
            vec!["x".into(), "y".into()],
            1,
        )
        .unwrap();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        // x*y > y^2 at equal total degree
        let xy = mono(&sig, &[1, 1], 0);
        let y2 = mono(&sig, &[0, 2], 0);
        assert_eq!(ord.compare(&xy, &y2), Ordering::Greater);
    }

    #[test]
    fn t_elimination_dominance() {
        let sig = sig_xy();
        let f = {
            let field = sig.coef_field();
            PolyX::var(field, 2, 0)
        };
        let sig_t = sig.with_localization("T", f).unwrap();
        let ord = OrderSpec::default_for(&sig_t).compile(&sig_t).unwrap();
        // T e1 beats x^100 Dx^100 e1
        let t = mono(&sig_t, &[0, 0, 0, 0, 1], 1);
        let big = mono(&sig_t, &[100, 0, 100, 0, 0], 1);
        assert_eq!(ord.compare(&t, &big), Ordering::Greater);
    }

    #[test]
    fn weight_order_prefers_derivatives() {
        let sig = sig_xy();
        let ord = OrderSpec::weight_on_derivatives(&sig).compile(&sig).unwrap();
        let dx = mono(&sig, &[0, 0, 1, 0], 0);
        let x5 = mono(&sig, &[5, 0, 0, 0], 0);
        assert_eq!(ord.compare(&dx, &x5), Ordering::Greater);
    }

    #[test]
    fn leading_monomials() {
        let sig = sig_xy();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let field = sig.coef_field();
        let fx = {
            let x = PolyX::var(field, 2, 0);
            let y = PolyX::var(field, 2, 1);
            x.mul(field, &x).sub(field, &y.pow(field, 3))
        };
        let dx = WeylElement::deriv(&sig, DerivTarget::Poly(0)).unwrap();
        let g1 = crate::weyl::multiply(&dx, &fx.to_weyl(&sig)).unwrap();
        // grevlex compares total degree first, so y^3 Dx (degree 4) leads
        let (lm, lc) = ord.leading_term(&g1).unwrap();
        assert_eq!(*lm, mono(&sig, &[0, 3, 1, 0], 0));
        assert!(lc.is_display_negative());

        // Euler operator: x Dx beats y Dy under the grevlex tie-break
        let x = WeylElement::poly_var(&sig, 0);
        let y = WeylElement::poly_var(&sig, 1);
        let dy = WeylElement::deriv(&sig, DerivTarget::Poly(1)).unwrap();
        let euler = crate::weyl::multiply(&x, &dx)
            .unwrap()
            .scale_i64(3)
            .add(&crate::weyl::multiply(&y, &dy).unwrap().scale_i64(2))
            .add(&WeylElement::from_i64(&sig, 6));
        let (lm, lc) = ord.leading_term(&euler).unwrap();
        assert_eq!(*lm, mono(&sig, &[1, 0, 1, 0], 0));
        assert_eq!(*lc, sig.coef_field().from_i64(3));
    }

    #[test]
    fn lm_of_rabinowitsch_generator() {
        // lm(fT - 1) under T-elimination is lm(f) * T
        let sig = sig_xy();
        let field = sig.coef_field();
        let f = {
            let x = PolyX::var(field, 2, 0);
            let y = PolyX::var(field, 2, 1);
            x.mul(field, &x).sub(field, &y.pow(field, 3))
        };
        let sig_t = sig.with_localization("T", f.clone()).unwrap();
        let ord = OrderSpec::default_for(&sig_t).compile(&sig_t).unwrap();
        let fw = f.to_weyl(&sig_t);
        let t = WeylElement::t_var(&sig_t).unwrap();
        let ft1 = crate::weyl::multiply(&fw, &t)
            .unwrap()
            .sub(&WeylElement::one(&sig_t));
        let (lm, _) = ord.leading_term(&ft1).unwrap();
        assert_eq!(*lm, mono(&sig_t, &[0, 3, 0, 0, 1], 0)); // y^3 T
    }

    #[test]
    fn divisor_minimality_and_multiplicativity() {
        let sig = sig_xy();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let a = mono(&sig, &[1, 0, 1, 0], 1);
        let b = mono(&sig, &[1, 2, 1, 0], 1);
        assert!(a.divides(&b, sig.layout()));
        assert_eq!(ord.compare(&a, &b), Ordering::Less);
        // multiplicativity on a small grid
        let m = mono(&sig, &[2, 1, 0, 3], 0);
        let mul = |u: &Monomial| Monomial {
            exps: u.exps.iter().zip(m.exps.iter()).map(|(x, y)| x + y).collect(),
            pos: u.pos,
        };
        assert_eq!(ord.compare(&mul(&a), &mul(&b)), Ordering::Less);
    }

    #[test]
    fn coverage_validation() {
        let sig = sig_xy();
        let bad = OrderSpec {
            term: TermOrder::Grevlex(vec!["x".into(), "y".into()]),
            module: ModuleLayer::PositionOverTerm { priority: None },
            t_elim: false,
        };
        assert!(bad.compile(&sig).is_err()); // derivatives not covered
        let dup = OrderSpec {
            term: TermOrder::Block(vec![
                TermOrder::Grevlex(vec!["x".into(), "y".into(), "Dx".into(), "Dy".into()]),
                TermOrder::Lex(vec!["x".into()]),
            ]),
            module: ModuleLayer::PositionOverTerm { priority: None },
            t_elim: false,
        };
        assert!(dup.compile(&sig).is_err());
    }

    #[test]
    fn position_over_term_prefers_small_positions() {
        let sig = AlgebraSignature::weyl_poly(BaseField::Rationals, &["x"], 2).unwrap();
        let ord = OrderSpec::default_for(&sig).compile(&sig).unwrap();
        let e1 = mono(&sig, &[5, 5], 1);
        let e2 = mono(&sig, &[0, 0], 2);
        assert_eq!(ord.compare(&e2, &e1), Ordering::Less);
        // explicit priority can flip that
        let flipped = OrderSpec::default_for(&sig)
            .with_position_priority(vec![2, 1])
            .compile(&sig)
            .unwrap();
        assert_eq!(flipped.compare(&e2, &e1), Ordering::Greater);
    }
}
