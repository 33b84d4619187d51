//! Normal-ordered arithmetic in free modules over mixed Weyl algebras.
//!
//! An [`AlgebraSignature`] declares rational variables (living in the
//! coefficient field), polynomial variables, which derivatives are present,
//! the module rank, and optionally a localization variable `T` attached to a
//! polynomial `f`. Elements are stored in normal order: a term
//! `c(t) * x^a * D^b * T^j * e_i` denotes that exact left-to-right product,
//! so equal operators have identical term maps.
//!
//! The commutation rules are `D_v x_v = x_v D_v + 1`,
//! `D_v c(t) = c(t) D_v + dc/dv`, and `D_v T = T D_v - f_v T^2` where
//! `f_v = df/dv`; all other generator pairs commute.

mod action;
mod mult;

pub use action::{act_on_rational, annihilates, annihilates_exp, apply_scalar, conjugate_by_exp};

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::coef::{Coef, CoefField};
use crate::poly::{zero_exps, Exps, MultiPoly, PolyRing};
use crate::scalar::BaseField;
use crate::{Error, Result};

/// Where a derivative slot points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivTarget {
    Poly(usize),
    Rational(usize),
}

/// Exponent-vector layout: polynomial variables first, then the flagged
/// derivatives (polynomial then rational, in declaration order), then `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub n_poly: usize,
    pub poly_deriv_slot: Vec<Option<usize>>,
    pub rat_deriv_slot: Vec<Option<usize>>,
    pub t_slot: Option<usize>,
    pub len: usize,
    /// Derivative slots in slot order.
    pub derivs: Vec<(usize, DerivTarget)>,
}

/// The localization data: `T` together with its polynomial `f` and the
/// precomputed partials of `f`, one per derivative slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Localization {
    pub t_name: String,
    pub f: PolyX,
    pub f_derivs: Vec<PolyX>,
}

pub struct AlgebraSignature {
    rational_vars: Vec<String>,
    poly_vars: Vec<String>,
    poly_derivs: Vec<bool>,
    rat_derivs: Vec<bool>,
    rank: u32,
    localization: Option<Localization>,
    coef_field: CoefField,
    layout: Layout,
    memo: Mutex<HashMap<(u16, Exps), Arc<Vec<(Exps, Coef)>>>>,
}

impl std::fmt::Debug for AlgebraSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AlgebraSignature")
            .field("rational_vars", &self.rational_vars)
            .field("poly_vars", &self.poly_vars)
            .field("rank", &self.rank)
            .field("localization", &self.localization.as_ref().map(|l| &l.t_name))
            .finish()
    }
}

impl PartialEq for AlgebraSignature {
    fn eq(&self, other: &Self) -> bool {
        self.rational_vars == other.rational_vars
            && self.poly_vars == other.poly_vars
            && self.poly_derivs == other.poly_derivs
            && self.rat_derivs == other.rat_derivs
            && self.rank == other.rank
            && self.localization == other.localization
            && self.coef_field == other.coef_field
    }
}
impl Eq for AlgebraSignature {}

/// How a name resolves inside operator expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    PolyVar(usize),
    RationalVar(usize),
    PolyDeriv(usize),
    RationalDeriv(usize),
    LocVar,
}

impl AlgebraSignature {
    pub fn new(
        base: BaseField,
        rational_vars: Vec<String>,
        poly_vars: Vec<String>,
        poly_derivs: Vec<bool>,
        rat_derivs: Vec<bool>,
        rank: u32,
    ) -> Result<Arc<Self>> {
        if rank == 0 {
            return Err(Error::InvalidSignature("rank must be at least 1".into()));
        }
        if poly_derivs.len() != poly_vars.len() || rat_derivs.len() != rational_vars.len() {
            return Err(Error::InvalidSignature(
                "derivative flag lists must match the variable lists".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for v in rational_vars.iter().chain(poly_vars.iter()) {
            if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::InvalidSignature(format!("bad variable name `{v}`")));
            }
            if !seen.insert(v.clone()) {
                return Err(Error::InvalidSignature(format!("duplicate variable `{v}`")));
            }
        }
        // derivative names `D<var>` must not shadow declared variables
        for v in rational_vars.iter().chain(poly_vars.iter()) {
            let d = format!("D{v}");
            if seen.contains(&d) {
                return Err(Error::InvalidSignature(format!(
                    "variable `{d}` collides with the derivative of `{v}`"
                )));
            }
        }

        let n_poly = poly_vars.len();
        let mut slot = n_poly;
        let mut poly_deriv_slot = vec![None; n_poly];
        let mut derivs = Vec::new();
        for (i, &has) in poly_derivs.iter().enumerate() {
            if has {
                poly_deriv_slot[i] = Some(slot);
                derivs.push((slot, DerivTarget::Poly(i)));
                slot += 1;
            }
        }
        let mut rat_deriv_slot = vec![None; rational_vars.len()];
        for (j, &has) in rat_derivs.iter().enumerate() {
            if has {
                rat_deriv_slot[j] = Some(slot);
                derivs.push((slot, DerivTarget::Rational(j)));
                slot += 1;
            }
        }
        let layout = Layout {
            n_poly,
            poly_deriv_slot,
            rat_deriv_slot,
            t_slot: None,
            len: slot,
            derivs,
        };
        let coef_field = CoefField::new(base, &rational_vars);
        Ok(Arc::new(AlgebraSignature {
            rational_vars,
            poly_vars,
            poly_derivs,
            rat_derivs,
            rank,
            localization: None,
            coef_field,
            layout,
            memo: Mutex::new(HashMap::new()),
        }))
    }

    /// Fully mixed algebra: every variable carries its derivative.
    pub fn mixed(
        base: BaseField,
        rational_vars: Vec<String>,
        poly_vars: Vec<String>,
        rank: u32,
    ) -> Result<Arc<Self>> {
        let pd = vec![true; poly_vars.len()];
        let rd = vec![true; rational_vars.len()];
        Self::new(base, rational_vars, poly_vars, pd, rd, rank)
    }

    /// Polynomial Weyl algebra `W_x`.
    pub fn weyl_poly(base: BaseField, vars: &[&str], rank: u32) -> Result<Arc<Self>> {
        Self::mixed(base, vec![], vars.iter().map(|s| s.to_string()).collect(), rank)
    }

    /// Commutative polynomial ring (no derivatives, no localization).
    pub fn commutative(base: BaseField, vars: Vec<String>, rank: u32) -> Result<Arc<Self>> {
        let n = vars.len();
        Self::new(base, vec![], vars, vec![false; n], vec![], rank)
    }

    /// Commutative ring with coefficients in `K(rational_vars)`.
    pub fn commutative_over(
        base: BaseField,
        rational_vars: Vec<String>,
        vars: Vec<String>,
        rank: u32,
    ) -> Result<Arc<Self>> {
        let n = vars.len();
        let m = rational_vars.len();
        Self::new(base, rational_vars, vars, vec![false; n], vec![false; m], rank)
    }

    /// Extends the signature with a localization variable attached to `f`.
    pub fn with_localization(self: &Arc<Self>, t_name: &str, f: PolyX) -> Result<Arc<Self>> {
        if self.localization.is_some() {
            return Err(Error::InvalidSignature(
                "signature already has a localization variable".into(),
            ));
        }
        if f.is_zero() {
            return Err(Error::InvalidSignature(
                "localization polynomial must be nonzero".into(),
            ));
        }
        if f.n_poly != self.layout.n_poly {
            return Err(Error::SignatureMismatch(
                "localization polynomial over the wrong variables".into(),
            ));
        }
        if self
            .rational_vars
            .iter()
            .chain(self.poly_vars.iter())
            .any(|v| *v == t_name)
        {
            return Err(Error::InvalidSignature(format!(
                "localization name `{t_name}` collides with a variable"
            )));
        }
        let mut f_derivs = Vec::new();
        for &(_, target) in &self.layout.derivs {
            f_derivs.push(match target {
                DerivTarget::Poly(i) => f.derivative_poly(&self.coef_field, i),
                DerivTarget::Rational(j) => f.derivative_rational(&self.coef_field, j),
            });
        }
        let mut layout = self.layout.clone();
        layout.t_slot = Some(layout.len);
        layout.len += 1;
        Ok(Arc::new(AlgebraSignature {
            rational_vars: self.rational_vars.clone(),
            poly_vars: self.poly_vars.clone(),
            poly_derivs: self.poly_derivs.clone(),
            rat_derivs: self.rat_derivs.clone(),
            rank: self.rank,
            localization: Some(Localization {
                t_name: t_name.to_string(),
                f,
                f_derivs,
            }),
            coef_field: self.coef_field.clone(),
            layout,
            memo: Mutex::new(HashMap::new()),
        }))
    }

    /// The same signature without the localization variable.
    pub fn without_localization(self: &Arc<Self>) -> Arc<Self> {
        if self.localization.is_none() {
            return self.clone();
        }
        AlgebraSignature::new(
            self.coef_field.base,
            self.rational_vars.clone(),
            self.poly_vars.clone(),
            self.poly_derivs.clone(),
            self.rat_derivs.clone(),
            self.rank,
        )
        .expect("base signature is valid")
    }

    /// The fully rational signature: every polynomial variable is moved into
    /// the coefficient field, leaving only derivatives as monomial variables.
    pub fn rationalized(self: &Arc<Self>) -> Result<Arc<Self>> {
        if self.localization.is_some() {
            return Err(Error::Invalid(
                "cannot rationalize a localized signature".into(),
            ));
        }
        let mut rat = self.rational_vars.clone();
        rat.extend(self.poly_vars.iter().cloned());
        let mut rd = self.rat_derivs.clone();
        rd.extend(self.poly_derivs.iter().cloned());
        AlgebraSignature::new(self.coef_field.base, rat, vec![], vec![], rd, self.rank)
    }

    pub fn rational_vars(&self) -> &[String] {
        &self.rational_vars
    }

    pub fn poly_vars(&self) -> &[String] {
        &self.poly_vars
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn coef_field(&self) -> &CoefField {
        &self.coef_field
    }

    pub fn base_field(&self) -> BaseField {
        self.coef_field.base
    }

    pub fn localization(&self) -> Option<&Localization> {
        self.localization.as_ref()
    }

    pub fn has_localization(&self) -> bool {
        self.localization.is_some()
    }

    /// True when every base variable carries its derivative.
    pub fn is_fully_mixed(&self) -> bool {
        self.poly_derivs.iter().all(|&b| b) && self.rat_derivs.iter().all(|&b| b)
    }

    pub fn resolve(&self, name: &str) -> Option<NameKind> {
        if let Some(loc) = &self.localization {
            if loc.t_name == name {
                return Some(NameKind::LocVar);
            }
        }
        if let Some(i) = self.poly_vars.iter().position(|v| v == name) {
            return Some(NameKind::PolyVar(i));
        }
        if let Some(j) = self.rational_vars.iter().position(|v| v == name) {
            return Some(NameKind::RationalVar(j));
        }
        if let Some(rest) = name.strip_prefix('D') {
            if let Some(i) = self.poly_vars.iter().position(|v| v == rest) {
                if self.poly_derivs[i] {
                    return Some(NameKind::PolyDeriv(i));
                }
            }
            if let Some(j) = self.rational_vars.iter().position(|v| v == rest) {
                if self.rat_derivs[j] {
                    return Some(NameKind::RationalDeriv(j));
                }
            }
        }
        None
    }

    /// Name of the monomial variable stored at exponent slot `slot`.
    pub fn slot_name(&self, slot: usize) -> String {
        let l = &self.layout;
        if slot < l.n_poly {
            return self.poly_vars[slot].clone();
        }
        if Some(slot) == l.t_slot {
            return self.localization.as_ref().unwrap().t_name.clone();
        }
        for &(s, target) in &l.derivs {
            if s == slot {
                return match target {
                    DerivTarget::Poly(i) => format!("D{}", self.poly_vars[i]),
                    DerivTarget::Rational(j) => format!("D{}", self.rational_vars[j]),
                };
            }
        }
        unreachable!("slot out of range")
    }

    /// Monomial variable names in slot order (excluding `T`).
    pub fn monomial_var_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for i in 0..self.layout.n_poly {
            names.push(self.poly_vars[i].clone());
        }
        for &(s, _) in &self.layout.derivs {
            names.push(self.slot_name(s));
        }
        names
    }

    /// Ring of rational functions in all base variables, the domain the
    /// operators act on.
    pub fn full_function_ring(&self) -> Arc<PolyRing> {
        let mut vars = self.rational_vars.clone();
        vars.extend(self.poly_vars.iter().cloned());
        PolyRing::new(self.coef_field.base, vars)
    }

    pub(crate) fn memo_lookup(&self, key: &(u16, Exps)) -> Option<Arc<Vec<(Exps, Coef)>>> {
        self.memo.lock().unwrap().get(key).cloned()
    }

    pub(crate) fn memo_store(&self, key: (u16, Exps), val: Arc<Vec<(Exps, Coef)>>) {
        self.memo.lock().unwrap().insert(key, val);
    }
}

pub fn same_signature(a: &Arc<AlgebraSignature>, b: &Arc<AlgebraSignature>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A commutative polynomial in the signature's polynomial variables with
/// coefficients in the coefficient field — an element of `K(t)[x]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyX {
    pub n_poly: usize,
    pub terms: BTreeMap<Exps, Coef>,
}

impl PolyX {
    pub fn zero(n_poly: usize) -> Self {
        PolyX {
            n_poly,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_poly: usize, c: Coef) -> Self {
        let mut p = Self::zero(n_poly);
        if !c.is_zero() {
            p.terms.insert(zero_exps(n_poly), c);
        }
        p
    }

    pub fn one(field: &CoefField, n_poly: usize) -> Self {
        Self::constant(n_poly, field.one())
    }

    pub fn var(field: &CoefField, n_poly: usize, idx: usize) -> Self {
        let mut e = zero_exps(n_poly);
        e[idx] = 1;
        let mut p = Self::zero(n_poly);
        p.terms.insert(e, field.one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.terms.values().next().map(|c| c.is_one()).unwrap_or(false)
    }

    fn add_term(&mut self, field: &CoefField, e: Exps, c: Coef) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = field.add(o.get(), &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, field: &CoefField, other: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(field, e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self, field: &CoefField) -> Self {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = field.neg(c);
        }
        r
    }

    pub fn sub(&self, field: &CoefField, other: &Self) -> Self {
        self.add(field, &other.neg(field))
    }

    pub fn mul(&self, field: &CoefField, other: &Self) -> Self {
        let mut r = Self::zero(self.n_poly);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exps = e1.iter().zip(e2.iter()).map(|(a, b)| a + b).collect();
                r.add_term(field, e, field.mul(c1, c2));
            }
        }
        r
    }

    pub fn scale(&self, field: &CoefField, c: &Coef) -> Self {
        let mut r = Self::zero(self.n_poly);
        for (e, c0) in &self.terms {
            r.add_term(field, e.clone(), field.mul(c0, c));
        }
        r
    }

    pub fn pow(&self, field: &CoefField, e: u32) -> Self {
        let mut acc = Self::constant(self.n_poly, field.one());
        for _ in 0..e {
            acc = acc.mul(field, self);
        }
        acc
    }

    pub fn derivative_poly(&self, field: &CoefField, idx: usize) -> Self {
        let mut r = Self::zero(self.n_poly);
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[idx] -= 1;
            r.add_term(field, ne, field.mul_i64(c, e[idx] as i64));
        }
        r
    }

    pub fn derivative_rational(&self, field: &CoefField, idx: usize) -> Self {
        let mut r = Self::zero(self.n_poly);
        for (e, c) in &self.terms {
            r.add_term(field, e.clone(), field.derivative(c, idx));
        }
        r
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
    }

    pub fn to_weyl(&self, sig: &Arc<AlgebraSignature>) -> WeylElement {
        let mut elem = WeylElement::zero(sig);
        for (e, c) in &self.terms {
            let mut exps = zero_exps(sig.layout.len);
            for (i, &x) in e.iter().enumerate() {
                exps[i] = x;
            }
            elem.add_term(Monomial { exps, pos: 0 }, c.clone());
        }
        elem
    }
}

/// A monomial `x^a D^b T^j e_pos`; `pos` 0 marks a scalar (position-free)
/// operator, module positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub exps: Exps,
    pub pos: u32,
}

impl Monomial {
    pub fn unit(sig: &AlgebraSignature, pos: u32) -> Self {
        Monomial {
            exps: zero_exps(sig.layout.len),
            pos,
        }
    }

    pub fn t_exp(&self, layout: &Layout) -> u16 {
        layout.t_slot.map(|s| self.exps[s]).unwrap_or(0)
    }

    /// Total degree in the base variables and derivatives, `T` excluded.
    pub fn total_degree(&self, layout: &Layout) -> u32 {
        self.exps
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != layout.t_slot)
            .map(|(_, &e)| e as u32)
            .sum()
    }

    /// Divisibility in the module sense: equal position, equal `T` exponent,
    /// componentwise-smaller scalar exponents. Multipliers never contain `T`
    /// because `W[T]^r` is handled as a `W`-module with basis `T^j e_i`.
    pub fn divides(&self, other: &Monomial, layout: &Layout) -> bool {
        if self.pos != other.pos {
            return false;
        }
        if let Some(ts) = layout.t_slot {
            if self.exps[ts] != other.exps[ts] {
                return false;
            }
        }
        self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    /// The scalar-monomial quotient `other / self` (exponent difference).
    pub fn quotient(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: other
                .exps
                .iter()
                .zip(self.exps.iter())
                .map(|(b, a)| b - a)
                .collect(),
            pos: 0,
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(other.exps.iter())
                .map(|(a, b)| *a.max(b))
                .collect(),
            pos: self.pos,
        }
    }

    /// Bitmask of monomial variables (excluding `T`) with positive exponent.
    pub fn support_mask(&self, layout: &Layout) -> u64 {
        let mut m = 0u64;
        for (i, &e) in self.exps.iter().enumerate() {
            if Some(i) == layout.t_slot {
                continue;
            }
            if e > 0 {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn is_unit(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }
}

#[derive(Clone)]
pub struct WeylElement {
    sig: Arc<AlgebraSignature>,
    terms: BTreeMap<Monomial, Coef>,
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        same_signature(&self.sig, &other.sig) && self.terms == other.terms
    }
}
impl Eq for WeylElement {}

impl std::fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WeylElement({self})")
    }
}

impl WeylElement {
    pub fn zero(sig: &Arc<AlgebraSignature>) -> Self {
        WeylElement {
            sig: sig.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(sig: &Arc<AlgebraSignature>) -> Self {
        Self::constant(sig, sig.coef_field.one())
    }

    pub fn constant(sig: &Arc<AlgebraSignature>, c: Coef) -> Self {
        let mut e = Self::zero(sig);
        e.add_term(Monomial::unit(sig, 0), c);
        e
    }

    pub fn from_i64(sig: &Arc<AlgebraSignature>, n: i64) -> Self {
        Self::constant(sig, sig.coef_field.from_i64(n))
    }

    /// The basis vector `e_pos` (1-based).
    pub fn basis_vector(sig: &Arc<AlgebraSignature>, pos: u32) -> Result<Self> {
        if pos == 0 || pos > sig.rank {
            return Err(Error::invalid(format!("position {pos} out of range")));
        }
        let mut e = Self::zero(sig);
        e.add_term(Monomial::unit(sig, pos), sig.coef_field.one());
        Ok(e)
    }

    pub fn poly_var(sig: &Arc<AlgebraSignature>, idx: usize) -> Self {
        let mut m = Monomial::unit(sig, 0);
        m.exps[idx] = 1;
        let mut e = Self::zero(sig);
        e.add_term(m, sig.coef_field.one());
        e
    }

    pub fn rational_var(sig: &Arc<AlgebraSignature>, idx: usize) -> Self {
        Self::constant(sig, sig.coef_field.var(idx))
    }

    pub fn deriv(sig: &Arc<AlgebraSignature>, target: DerivTarget) -> Result<Self> {
        let slot = match target {
            DerivTarget::Poly(i) => sig.layout.poly_deriv_slot.get(i).copied().flatten(),
            DerivTarget::Rational(j) => sig.layout.rat_deriv_slot.get(j).copied().flatten(),
        }
        .ok_or_else(|| Error::invalid("derivative not present in signature"))?;
        let mut m = Monomial::unit(sig, 0);
        m.exps[slot] = 1;
        let mut e = Self::zero(sig);
        e.add_term(m, sig.coef_field.one());
        Ok(e)
    }

    pub fn t_var(sig: &Arc<AlgebraSignature>) -> Result<Self> {
        let slot = sig
            .layout
            .t_slot
            .ok_or_else(|| Error::invalid("signature has no localization variable"))?;
        let mut m = Monomial::unit(sig, 0);
        m.exps[slot] = 1;
        let mut e = Self::zero(sig);
        e.add_term(m, sig.coef_field.one());
        Ok(e)
    }

    pub fn monomial_term(sig: &Arc<AlgebraSignature>, m: Monomial, c: Coef) -> Self {
        let mut e = Self::zero(sig);
        e.add_term(m, c);
        e
    }

    pub fn sig(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coef)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every term is position-free.
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|m| m.pos == 0)
    }

    pub fn is_positioned(&self) -> bool {
        self.terms.keys().all(|m| m.pos > 0)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Coef) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = self.sig.coef_field.add(o.get(), &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert!(same_signature(&self.sig, &other.sig));
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c = self.sig.coef_field.neg(c);
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Coef) -> Self {
        if c.is_zero() {
            return Self::zero(&self.sig);
        }
        let mut r = self.clone();
        for v in r.terms.values_mut() {
            *v = self.sig.coef_field.mul(v, c);
        }
        r
    }

    pub fn scale_i64(&self, n: i64) -> Self {
        self.scale(&self.sig.coef_field.from_i64(n))
    }

    /// Moves a scalar element to module position `pos`.
    pub fn at_position(&self, pos: u32) -> Result<Self> {
        if !self.is_scalar() {
            return Err(Error::invalid("element already has positions"));
        }
        if pos == 0 || pos > self.sig.rank {
            return Err(Error::invalid(format!("position {pos} out of range")));
        }
        let mut r = Self::zero(&self.sig);
        for (m, c) in &self.terms {
            let mut nm = m.clone();
            nm.pos = pos;
            r.terms.insert(nm, c.clone());
        }
        Ok(r)
    }

    /// Extracts the component at `pos` as a scalar element.
    pub fn component(&self, pos: u32) -> Self {
        let mut r = Self::zero(&self.sig);
        for (m, c) in &self.terms {
            if m.pos == pos {
                let mut nm = m.clone();
                nm.pos = 0;
                r.terms.insert(nm, c.clone());
            }
        }
        r
    }

    pub fn positions(&self) -> Vec<u32> {
        let mut ps: Vec<u32> = self.terms.keys().map(|m| m.pos).collect();
        ps.dedup();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    /// `deg(P)`: maximum total degree over the base variables and
    /// derivatives, `T` excluded. The zero element is rejected.
    pub fn total_degree(&self) -> Result<u32> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        Ok(self
            .terms
            .keys()
            .map(|m| m.total_degree(&self.sig.layout))
            .max()
            .unwrap())
    }

    /// Largest `T` exponent appearing.
    pub fn deg_t(&self) -> Result<u32> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        if self.sig.layout.t_slot.is_none() {
            return Err(Error::invalid("signature has no localization variable"));
        }
        Ok(self
            .terms
            .keys()
            .map(|m| m.t_exp(&self.sig.layout) as u32)
            .max()
            .unwrap())
    }

    pub fn is_t_free(&self) -> bool {
        match self.sig.layout.t_slot {
            None => true,
            Some(s) => self.terms.keys().all(|m| m.exps[s] == 0),
        }
    }

    /// Reinterprets the element in the `T`-extended signature.
    pub fn lift_to(&self, sig_t: &Arc<AlgebraSignature>) -> Result<Self> {
        if *sig_t.without_localization() != *self.sig.without_localization() {
            return Err(Error::SignatureMismatch(
                "localized signature does not extend this one".into(),
            ));
        }
        let mut r = Self::zero(sig_t);
        for (m, c) in &self.terms {
            let mut exps = m.exps.clone();
            exps.push(0);
            r.terms.insert(Monomial { exps, pos: m.pos }, c.clone());
        }
        Ok(r)
    }

    /// Drops the `T` slot; the element must be `T`-free.
    pub fn strip_t(&self, base: &Arc<AlgebraSignature>) -> Result<Self> {
        let ts = self
            .sig
            .layout
            .t_slot
            .ok_or_else(|| Error::invalid("element has no localization slot"))?;
        if !self.is_t_free() {
            return Err(Error::invalid("element is not T-free"));
        }
        let mut r = Self::zero(base);
        for (m, c) in &self.terms {
            let mut exps = m.exps.clone();
            exps.remove(ts);
            r.terms.insert(Monomial { exps, pos: m.pos }, c.clone());
        }
        Ok(r)
    }

    /// Re-expresses the element over the fully rational signature: polynomial
    /// variables move into the coefficients, only derivatives remain in the
    /// monomials.
    pub fn rationalize(&self, rsig: &Arc<AlgebraSignature>) -> Result<Self> {
        let layout = &self.sig.layout;
        if layout.t_slot.is_some() {
            return Err(Error::invalid("cannot rationalize a localized element"));
        }
        let rfield = rsig.coef_field();
        let rring = rfield.ring.as_ref().expect("rationalized field has variables");
        let m_old = self.sig.rational_vars.len();
        let mut r = Self::zero(rsig);
        for (m, c) in &self.terms {
            // coefficient: c * x^alpha, embedded in K(t, x)
            let mut cnum = match c {
                Coef::S(s) => MultiPoly::constant(rring, s.clone()),
                Coef::R(rf) => {
                    let map: Vec<usize> = (0..m_old).collect();
                    rf.num().embed(rring, &map)
                }
            };
            let cden = match c {
                Coef::S(_) => MultiPoly::one(rring),
                Coef::R(rf) => {
                    let map: Vec<usize> = (0..m_old).collect();
                    rf.den().embed(rring, &map)
                }
            };
            for i in 0..layout.n_poly {
                if m.exps[i] > 0 {
                    let mut e = zero_exps(rring.nvars());
                    e[m_old + i] = m.exps[i];
                    cnum = cnum.mul(&MultiPoly::monomial(rring, e, rring.field.one()));
                }
            }
            let coef = Coef::R(crate::ratfun::RatFun::new(cnum, cden)?);
            let mut exps = zero_exps(rsig.layout.len);
            for (k, &(slot, target)) in layout.derivs.iter().enumerate() {
                // derivative slots keep their relative order in the new signature
                let _ = k;
                let new_slot = match target {
                    DerivTarget::Poly(i) => rsig.layout.rat_deriv_slot[m_old + i],
                    DerivTarget::Rational(j) => rsig.layout.rat_deriv_slot[j],
                }
                .expect("derivative preserved");
                exps[new_slot] = m.exps[slot];
            }
            r.add_term(Monomial { exps, pos: m.pos }, coef);
        }
        Ok(r)
    }

    /// Interprets a scalar, derivative-free, `T`-free element as a
    /// commutative polynomial in the polynomial variables.
    pub fn to_polyx(&self) -> Result<PolyX> {
        let layout = &self.sig.layout;
        let mut p = PolyX::zero(layout.n_poly);
        for (m, c) in &self.terms {
            if m.pos != 0 {
                return Err(Error::invalid("expected a scalar element"));
            }
            if m.exps[layout.n_poly..].iter().any(|&e| e > 0) {
                return Err(Error::invalid(
                    "expected an element free of derivatives and T",
                ));
            }
            let e: Exps = m.exps[..layout.n_poly].iter().copied().collect();
            p.terms.insert(e, c.clone());
        }
        Ok(p)
    }

    /// Converts a polynomial in all base variables (rational first, then
    /// polynomial, as in `full_function_ring`) into the operator it
    /// represents: rational parts join the coefficient, polynomial parts the
    /// monomial.
    pub fn from_full_poly(sig: &Arc<AlgebraSignature>, p: &MultiPoly) -> Result<Self> {
        let m_rat = sig.rational_vars.len();
        let field = sig.coef_field();
        let mut r = Self::zero(sig);
        for (e, s) in p.terms() {
            let mut coef = field.from_scalar(s.clone());
            for j in 0..m_rat {
                if e[j] > 0 {
                    let v = field.var(j);
                    coef = field.mul(&coef, &v_pow(field, &v, e[j] as u32));
                }
            }
            let mut exps = zero_exps(sig.layout.len);
            for i in 0..sig.layout.n_poly {
                exps[i] = e[m_rat + i];
            }
            r.add_term(Monomial { exps, pos: 0 }, coef);
        }
        Ok(r)
    }

    /// Total number of stored terms, used for budget accounting.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

fn v_pow(field: &CoefField, v: &Coef, e: u32) -> Coef {
    let mut acc = field.one();
    for _ in 0..e {
        acc = field.mul(&acc, v);
    }
    acc
}

impl std::fmt::Display for WeylElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_scalar() || self.sig.rank == 1 {
            return fmt_component(f, self, if self.is_scalar() { 0 } else { 1 });
        }
        write!(f, "[")?;
        for pos in 1..=self.sig.rank {
            if pos > 1 {
                write!(f, ", ")?;
            }
            fmt_component(f, self, pos)?;
        }
        write!(f, "]")
    }
}

fn fmt_component(f: &mut std::fmt::Formatter<'_>, elem: &WeylElement, pos: u32) -> std::fmt::Result {
    let sig = elem.sig();
    let layout = sig.layout();
    let mut terms: Vec<(&Monomial, &Coef)> = elem.terms().filter(|(m, _)| m.pos == pos).collect();
    if terms.is_empty() {
        return write!(f, "0");
    }
    terms.sort_by(|a, b| {
        let da: u32 = a.0.exps.iter().map(|&e| e as u32).sum();
        let db: u32 = b.0.exps.iter().map(|&e| e as u32).sum();
        db.cmp(&da).then_with(|| b.0.exps.cmp(&a.0.exps))
    });
    for (i, (m, c)) in terms.iter().enumerate() {
        let neg = c.is_display_negative();
        if i == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let mag = if neg {
            sig.coef_field().neg(c)
        } else {
            (*c).clone()
        };
        let mut printed = false;
        if !mag.is_one() || m.is_unit() {
            fmt_coef(f, &mag)?;
            printed = true;
        }
        for (slot, &e) in m.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if printed {
                write!(f, "*")?;
            }
            write!(f, "{}", sig.slot_name(slot))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
            printed = true;
        }
        let _ = layout;
    }
    Ok(())
}

fn fmt_coef(f: &mut std::fmt::Formatter<'_>, c: &Coef) -> std::fmt::Result {
    match c {
        Coef::S(s) => write!(f, "{s}"),
        Coef::R(r) => {
            if r.is_polynomial() {
                if r.num().num_terms() <= 1 {
                    write!(f, "{}", r.num())
                } else {
                    write!(f, "({})", r.num())
                }
            } else {
                if r.num().num_terms() <= 1 {
                    write!(f, "{}", r.num())?;
                } else {
                    write!(f, "({})", r.num())?;
                }
                write!(f, "/({})", r.den())
            }
        }
    }
}

/// Checked product entry point; see [`mult`] for the rewriting rules.
pub fn multiply(p: &WeylElement, q: &WeylElement) -> Result<WeylElement> {
    if !same_signature(p.sig(), q.sig()) {
        return Err(Error::SignatureMismatch(
            "operands live in different algebras".into(),
        ));
    }
    let p_positioned = !p.is_scalar();
    let q_positioned = !q.is_scalar();
    if p_positioned && q_positioned {
        return Err(Error::invalid(
            "product of two module elements is undefined",
        ));
    }
    Ok(mult::mul_unchecked(p, q))
}

/// Normal-ordered `T^i * P`.
pub fn left_multiply_by_t_power(p: &WeylElement, i: u32) -> Result<WeylElement> {
    if p.sig().layout.t_slot.is_none() {
        return Err(Error::invalid("signature has no localization variable"));
    }
    Ok(mult::lmul_t_pow(i as u16, p))
}
