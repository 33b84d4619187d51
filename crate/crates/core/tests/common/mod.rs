//! Shared test support: an independent naive commutative Gröbner engine,
//! a degree-bounded linear-algebra membership oracle for Weyl modules, and
//! seeded random generators. Nothing here touches the engine's own
//! reduction paths beyond `multiply`, which is separately validated against
//! the action oracle.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use wclose_core::coef::Coef;
use wclose_core::poly::Exps;
use wclose_core::scalar::Scalar;
use wclose_core::weyl::{multiply, AlgebraSignature, Monomial, PolyX, WeylElement};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// naive dense commutative Gröbner engine over QQ (grevlex), kept separate
// from the production code path on purpose

pub type NPoly = BTreeMap<Vec<u16>, BigRational>;

fn ncmp(a: &[u16], b: &[u16]) -> std::cmp::Ordering {
    let da: u64 = a.iter().map(|&x| x as u64).sum();
    let db: u64 = b.iter().map(|&x| x as u64).sum();
    da.cmp(&db).then_with(|| {
        for i in (0..a.len()).rev() {
            if a[i] != b[i] {
                return b[i].cmp(&a[i]);
            }
        }
        std::cmp::Ordering::Equal
    })
}

pub fn nadd_term(p: &mut NPoly, e: Vec<u16>, c: BigRational) {
    if c.is_zero() {
        return;
    }
    match p.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

pub fn nsub(a: &NPoly, b: &NPoly) -> NPoly {
    let mut r = a.clone();
    for (e, c) in b {
        nadd_term(&mut r, e.clone(), -c.clone());
    }
    r
}

pub fn nmul_term(p: &NPoly, e: &[u16], c: &BigRational) -> NPoly {
    let mut r = NPoly::new();
    for (pe, pc) in p {
        let ne: Vec<u16> = pe.iter().zip(e.iter()).map(|(a, b)| a + b).collect();
        r.insert(ne, pc * c);
    }
    r
}

pub fn nlt(p: &NPoly) -> (&Vec<u16>, &BigRational) {
    p.iter().max_by(|a, b| ncmp(a.0, b.0)).expect("nonzero")
}

fn ndivides(a: &[u16], b: &[u16]) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x <= y)
}

pub fn nreduce(p: &NPoly, basis: &[NPoly]) -> NPoly {
    let mut r = p.clone();
    'outer: loop {
        if r.is_empty() {
            return r;
        }
        let monos: Vec<Vec<u16>> = r.keys().cloned().collect();
        for m in monos.iter().rev() {
            for g in basis {
                let (glm, glc) = nlt(g);
                if ndivides(glm, m) {
                    let q: Vec<u16> = m.iter().zip(glm.iter()).map(|(a, b)| a - b).collect();
                    let c = r[m].clone() / glc.clone();
                    r = nsub(&r, &nmul_term(g, &q, &c));
                    continue 'outer;
                }
            }
        }
        return r;
    }
}

/// Plain Buchberger: every pair, first-in-first-out, no criteria.
pub fn nbuchberger(gens: &[NPoly]) -> Vec<NPoly> {
    let mut basis: Vec<NPoly> = gens.iter().filter(|p| !p.is_empty()).cloned().collect();
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in 0..i {
            queue.push((j, i));
        }
    }
    let mut qi = 0;
    while qi < queue.len() {
        let (i, j) = queue[qi];
        qi += 1;
        let (lmi, lci) = {
            let (m, c) = nlt(&basis[i]);
            (m.clone(), c.clone())
        };
        let (lmj, lcj) = {
            let (m, c) = nlt(&basis[j]);
            (m.clone(), c.clone())
        };
        let lcm: Vec<u16> = lmi.iter().zip(lmj.iter()).map(|(a, b)| *a.max(b)).collect();
        let qi_: Vec<u16> = lcm.iter().zip(lmi.iter()).map(|(a, b)| a - b).collect();
        let qj_: Vec<u16> = lcm.iter().zip(lmj.iter()).map(|(a, b)| a - b).collect();
        let s = nsub(
            &nmul_term(&basis[i], &qi_, &(BigRational::one() / lci)),
            &nmul_term(&basis[j], &qj_, &(BigRational::one() / lcj)),
        );
        let r = nreduce(&s, &basis);
        if !r.is_empty() {
            let t = basis.len();
            for k in 0..t {
                queue.push((k, t));
            }
            basis.push(r);
        }
    }
    ninterreduce(basis)
}

pub fn ninterreduce(mut basis: Vec<NPoly>) -> Vec<NPoly> {
    loop {
        let mut changed = false;
        let mut idx = 0;
        while idx < basis.len() {
            let others: Vec<NPoly> = basis
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != idx)
                .map(|(_, p)| p.clone())
                .collect();
            let r = nreduce(&basis[idx], &others);
            if r != basis[idx] {
                changed = true;
                if r.is_empty() {
                    basis.remove(idx);
                    continue;
                }
                basis[idx] = r;
            }
            idx += 1;
        }
        if !changed {
            break;
        }
    }
    for p in basis.iter_mut() {
        let lc = nlt(p).1.clone();
        for c in p.values_mut() {
            *c /= lc.clone();
        }
    }
    basis.sort_by(|a, b| ncmp(nlt(a).0, nlt(b).0));
    basis
}

/// Converts a commutative rank-1 element over `QQ` to a naive polynomial.
pub fn to_npoly(e: &WeylElement) -> NPoly {
    let mut p = NPoly::new();
    for (m, c) in e.terms() {
        let Coef::S(Scalar::Q(q)) = c else {
            panic!("naive engine expects rational scalar coefficients")
        };
        p.insert(m.exps.iter().copied().collect(), q.clone());
    }
    p
}

pub fn from_npoly(sig: &Arc<AlgebraSignature>, p: &NPoly, pos: u32) -> WeylElement {
    let mut e = WeylElement::zero(sig);
    for (exps, c) in p {
        let mono = Monomial {
            exps: exps.iter().copied().collect(),
            pos,
        };
        e = e.add(&WeylElement::monomial_term(
            sig,
            mono,
            Coef::S(Scalar::Q(c.clone())),
        ));
    }
    e
}

// ---------------------------------------------------------------------------
// degree-bounded span oracle over QQ for Weyl modules

/// Row-reduced span of module elements, coefficients in QQ; membership is
/// linear-algebra reduction to zero. Rows are indexed by monomials.
pub struct DegSpan {
    rows: Vec<BTreeMap<Monomial, BigRational>>,
}

fn lead_of(row: &BTreeMap<Monomial, BigRational>) -> Option<Monomial> {
    row.keys().next_back().cloned()
}

impl DegSpan {
    pub fn new() -> Self {
        DegSpan { rows: Vec::new() }
    }

    fn to_row(e: &WeylElement) -> BTreeMap<Monomial, BigRational> {
        e.terms()
            .map(|(m, c)| {
                let Coef::S(Scalar::Q(q)) = c else {
                    panic!("span oracle expects rational scalars")
                };
                (m.clone(), q.clone())
            })
            .collect()
    }

    fn reduce_row(
        &self,
        mut row: BTreeMap<Monomial, BigRational>,
    ) -> BTreeMap<Monomial, BigRational> {
        for r in &self.rows {
            let lead = lead_of(r).unwrap();
            if let Some(c) = row.get(&lead).cloned() {
                let pivot = r[&lead].clone();
                let factor = c / pivot;
                for (m, v) in r {
                    let entry = row.entry(m.clone()).or_insert_with(BigRational::zero);
                    *entry -= &factor * v;
                }
                row.retain(|_, v| !v.is_zero());
            }
        }
        row
    }

    pub fn insert(&mut self, e: &WeylElement) {
        let row = self.reduce_row(Self::to_row(e));
        if row.is_empty() {
            return;
        }
        self.rows.push(row);
        self.rows.sort_by(|a, b| {
            lead_of(b).cmp(&lead_of(a)) // descending leads keep reduction one-pass
        });
    }

    pub fn contains(&self, e: &WeylElement) -> bool {
        self.reduce_row(Self::to_row(e)).is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }
}

/// Span of `{m * g}` over all scalar monomials `m` with
/// `deg(m * g) <= degree_cap`, for `g` among `gens`.
pub fn module_span(
    sig: &Arc<AlgebraSignature>,
    gens: &[WeylElement],
    degree_cap: u32,
) -> DegSpan {
    let layout = sig.layout();
    let nvars = layout.len;
    let mut span = DegSpan::new();
    for g in gens {
        let gdeg = g.total_degree().unwrap_or(0);
        if gdeg > degree_cap {
            continue;
        }
        let budget = degree_cap - gdeg;
        let mut exps = vec![0u16; nvars];
        'enumerate: loop {
            let total: u32 = exps.iter().map(|&e| e as u32).sum();
            if total <= budget && layout.t_slot.map(|t| exps[t] == 0).unwrap_or(true) {
                let mono = Monomial {
                    exps: exps.iter().copied().collect::<Exps>(),
                    pos: 0,
                };
                let mover =
                    WeylElement::monomial_term(sig, mono, sig.coef_field().from_i64(1));
                let prod = multiply(&mover, g).unwrap();
                if prod.total_degree().unwrap_or(0) <= degree_cap {
                    span.insert(&prod);
                }
            }
            // advance odometer, bounded per-variable by the budget
            let mut d = 0;
            loop {
                if d == nvars {
                    break 'enumerate;
                }
                exps[d] += 1;
                if exps[d] as u32 <= budget {
                    break;
                }
                exps[d] = 0;
                d += 1;
            }
        }
    }
    span
}

// ---------------------------------------------------------------------------
// random generators

pub fn random_scalar(rng: &mut StdRng) -> Coef {
    Coef::S(Scalar::Q(BigRational::from(BigInt::from(
        rng.gen_range(-4i64..=4),
    ))))
}

/// Random scalar operator with bounded term count and exponents.
pub fn random_operator(
    sig: &Arc<AlgebraSignature>,
    rng: &mut StdRng,
    max_terms: usize,
    max_exp: u16,
) -> WeylElement {
    let nvars = sig.layout().len;
    let mut e = WeylElement::zero(sig);
    let terms = rng.gen_range(1..=max_terms);
    for _ in 0..terms {
        let exps: Exps = (0..nvars).map(|_| rng.gen_range(0..=max_exp)).collect();
        let c = random_scalar(rng);
        e = e.add(&WeylElement::monomial_term(
            sig,
            Monomial { exps, pos: 0 },
            c,
        ));
    }
    e
}

/// Random nonzero polynomial in the signature's polynomial variables.
pub fn random_polyx(
    sig: &Arc<AlgebraSignature>,
    rng: &mut StdRng,
    max_terms: usize,
    max_exp: u16,
) -> PolyX {
    let n = sig.layout().n_poly;
    let field = sig.coef_field();
    loop {
        let mut p = PolyX::zero(n);
        for _ in 0..rng.gen_range(1..=max_terms) {
            let exps: Exps = (0..n).map(|_| rng.gen_range(0..=max_exp)).collect();
            let c = rng.gen_range(-3i64..=3);
            p = p.add(field, &PolyX::constant(n, field.from_i64(c)).mul_mono(exps));
        }
        if !p.is_zero() {
            return p;
        }
    }
}

// small helper on PolyX used only in tests
trait MulMono {
    fn mul_mono(self, exps: Exps) -> Self;
}

impl MulMono for PolyX {
    fn mul_mono(self, exps: Exps) -> Self {
        let mut out = PolyX::zero(self.n_poly);
        for (e, c) in &self.terms {
            let ne: Exps = e.iter().zip(exps.iter()).map(|(a, b)| a + b).collect();
            out.terms.insert(ne, c.clone());
        }
        out
    }
}
