//! Problem files, operator expressions, and the annihilator constructors
//! for the benchmark families.
//!
//! A problem file is line-oriented; `#` starts a comment. Directives:
//!
//! ```text
//! field QQ | Fp(536870909)
//! ratvars t
//! polyvars x y
//! rank 1
//! order grevlex(x,y,Dx,Dy)        # optional
//! locpoly x^2 - y^3               # optional; enables T in expressions
//! function 1/(x^2 - y^3)          # optional; oracle target
//! gen Dx*(x^2 - y^3)
//! gen [x*Dx, 1]                   # vectors for rank > 1
//! ```
//!
//! Operator expressions use integers, declared names, `D<name>` derivatives,
//! `T`, `+ - * / ^` and parentheses; `*` is non-commutative and
//! left-associative, and `/` only divides by coefficient-field scalars.

use std::sync::Arc;

use num::BigInt;

use crate::coef::FieldSpec;
use crate::order::{ModuleLayer, OrderSpec, TermOrder};
use crate::poly::MultiPoly;
use crate::ratfun::RatFun;
use crate::scalar::BaseField;
use crate::weyl::{multiply, AlgebraSignature, DerivTarget, NameKind, PolyX, WeylElement};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionExpr {
    Rational(RatFun),
    /// `exp(g)` for a polynomial `g` in the base variables.
    ExpPoly(MultiPoly),
}

impl std::fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FunctionExpr::Rational(r) => {
                if r.is_polynomial() {
                    write!(f, "{}", r.num())
                } else {
                    write!(f, "({})/({})", r.num(), r.den())
                }
            }
            FunctionExpr::ExpPoly(p) => write!(f, "exp({p})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub field: FieldSpec,
    pub rat_vars: Vec<String>,
    pub poly_vars: Vec<String>,
    pub rank: u32,
    pub order: Option<OrderSpec>,
    pub loc_poly: Option<PolyX>,
    pub function: Option<FunctionExpr>,
    /// Base signature, without the localization variable.
    pub sig: Arc<AlgebraSignature>,
    /// Signature the generators live in (localized when `locpoly` is set).
    pub sig_full: Arc<AlgebraSignature>,
    pub generators: Vec<WeylElement>,
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Gt,
    Eq,
    Semi,
}

#[derive(Debug, Clone)]
struct Sp {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(text: &str, line: usize) -> Result<Vec<Sp>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let tok = match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '#' => break,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '>' => Tok::Gt,
            '=' => Tok::Eq,
            ';' => Tok::Semi,
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Sp {
                    tok: Tok::Int(s.parse().expect("digits")),
                    line,
                    col,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                out.push(Sp {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                    col,
                });
                continue;
            }
            other => return Err(err_at(line, col, format!("unexpected character `{other}`"))),
        };
        out.push(Sp { tok, line, col });
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// operator expressions

struct OpParser<'a> {
    toks: &'a [Sp],
    pos: usize,
    sig: &'a Arc<AlgebraSignature>,
    line: usize,
}

impl<'a> OpParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.line, 1))
    }

    fn bump(&mut self) -> Option<&Sp> {
        let s = self.toks.get(self.pos);
        self.pos += 1;
        s
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        let (l, c) = self.here();
        match self.peek() {
            Some(x) if x == t => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(err_at(l, c, format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<WeylElement> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<WeylElement> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    let (l, c) = self.here();
                    acc = multiply(&acc, &rhs)
                        .map_err(|e| err_at(l, c, e.to_string()))?;
                }
                Some(Tok::Slash) => {
                    let (l, c) = self.here();
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = divide_by_scalar(&acc, &rhs)
                        .map_err(|e| err_at(l, c, e.to_string()))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<WeylElement> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<WeylElement> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let (l, c) = self.here();
            let e = match self.bump().map(|s| s.tok.clone()) {
                Some(Tok::Int(n)) => n,
                _ => return Err(err_at(l, c, "expected a non-negative integer exponent")),
            };
            let e: u32 = e
                .try_into()
                .map_err(|_| err_at(l, c, "exponent out of range"))?;
            let mut acc = WeylElement::one(base.sig());
            for _ in 0..e {
                acc = multiply(&acc, &base).map_err(|er| err_at(l, c, er.to_string()))?;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<WeylElement> {
        let (l, c) = self.here();
        match self.bump().map(|s| s.tok.clone()) {
            Some(Tok::Int(n)) => {
                let coef = self
                    .sig
                    .coef_field()
                    .from_scalar(self.sig.base_field().from_bigint(&n));
                Ok(WeylElement::constant(self.sig, coef))
            }
            Some(Tok::Ident(name)) => match self.sig.resolve(&name) {
                Some(NameKind::PolyVar(i)) => Ok(WeylElement::poly_var(self.sig, i)),
                Some(NameKind::RationalVar(j)) => Ok(WeylElement::rational_var(self.sig, j)),
                Some(NameKind::PolyDeriv(i)) => {
                    WeylElement::deriv(self.sig, DerivTarget::Poly(i))
                }
                Some(NameKind::RationalDeriv(j)) => {
                    WeylElement::deriv(self.sig, DerivTarget::Rational(j))
                }
                Some(NameKind::LocVar) => WeylElement::t_var(self.sig),
                None => Err(err_at(l, c, format!("undeclared variable `{name}`"))),
            },
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(err_at(l, c, "expected a number, variable, or `(`")),
        }
    }
}

fn divide_by_scalar(p: &WeylElement, q: &WeylElement) -> Result<WeylElement> {
    let coef = match q.terms().next() {
        None => return Err(Error::DivisionByZero),
        Some((m, c)) if q.num_terms() == 1 && m.is_unit() && m.pos == 0 => c.clone(),
        _ => {
            return Err(Error::invalid(
                "division is only defined by coefficient-field scalars",
            ))
        }
    };
    let inv = p.sig().coef_field().inv(&coef)?;
    Ok(p.scale(&inv))
}

/// Parses a scalar operator expression over a signature.
pub fn parse_operator(sig: &Arc<AlgebraSignature>, text: &str) -> Result<WeylElement> {
    parse_operator_at(sig, text, 1)
}

fn parse_operator_at(
    sig: &Arc<AlgebraSignature>,
    text: &str,
    line: usize,
) -> Result<WeylElement> {
    let toks = lex(text, line)?;
    let mut p = OpParser {
        toks: &toks,
        pos: 0,
        sig,
        line,
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        let (l, c) = p.here();
        return Err(err_at(l, c, "trailing input"));
    }
    Ok(e)
}

/// Parses a generator: either a scalar expression (rank 1) or a bracketed
/// vector of length `rank`; returns a positioned module element.
pub fn parse_generator(sig: &Arc<AlgebraSignature>, text: &str) -> Result<WeylElement> {
    parse_generator_at(sig, text, 1)
}

fn parse_generator_at(
    sig: &Arc<AlgebraSignature>,
    text: &str,
    line: usize,
) -> Result<WeylElement> {
    let toks = lex(text, line)?;
    let mut p = OpParser {
        toks: &toks,
        pos: 0,
        sig,
        line,
    };
    let rank = sig.rank();
    let elem = if matches!(p.peek(), Some(Tok::LBracket)) {
        p.pos += 1;
        let mut acc = WeylElement::zero(sig);
        for pos in 1..=rank {
            let comp = p.expr()?;
            acc = acc.add(&comp.at_position(pos)?);
            if pos < rank {
                p.expect(&Tok::Comma, "`,` (vector length must equal the rank)")?;
            }
        }
        p.expect(&Tok::RBracket, "`]` (vector length must equal the rank)")?;
        acc
    } else {
        if rank != 1 {
            let (l, c) = p.here();
            return Err(err_at(
                l,
                c,
                format!("rank-{rank} generators must be written as vectors"),
            ));
        }
        p.expr()?.at_position(1)?
    };
    if p.pos != toks.len() {
        let (l, c) = p.here();
        return Err(err_at(l, c, "trailing input"));
    }
    Ok(elem)
}

/// Parses a commutative polynomial in the polynomial variables (used for
/// `locpoly` and `--loc-poly`).
pub fn parse_polyx(sig: &Arc<AlgebraSignature>, text: &str) -> Result<PolyX> {
    parse_polyx_at(sig, text, 1)
}

fn parse_polyx_at(sig: &Arc<AlgebraSignature>, text: &str, line: usize) -> Result<PolyX> {
    let e = parse_operator_at(sig, text, line)?;
    e.to_polyx()
        .map_err(|_| err_at(line, 1, "expected a polynomial in the polynomial variables"))
}

// ---------------------------------------------------------------------------
// function expressions (commutative, with division and exp)

struct FnParser<'a> {
    toks: &'a [Sp],
    pos: usize,
    sig: &'a Arc<AlgebraSignature>,
    ring: Arc<crate::poly::PolyRing>,
    line: usize,
}

impl<'a> FnParser<'a> {
    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.line, 1))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn expr(&mut self) -> Result<RatFun> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFun> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    let (l, c) = self.here();
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.div(&rhs).map_err(|e| err_at(l, c, e.to_string()))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatFun> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFun> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let (l, c) = self.here();
            let e = match self.toks.get(self.pos).map(|s| s.tok.clone()) {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    n
                }
                _ => return Err(err_at(l, c, "expected a non-negative integer exponent")),
            };
            let e: u32 = e
                .try_into()
                .map_err(|_| err_at(l, c, "exponent out of range"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFun> {
        let (l, c) = self.here();
        let tok = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        match tok {
            Some(Tok::Int(n)) => Ok(RatFun::from_poly(MultiPoly::constant(
                &self.ring,
                self.ring.field.from_bigint(&n),
            ))),
            Some(Tok::Ident(name)) => {
                if let Some(idx) = self.ring.var_index(&name) {
                    return Ok(RatFun::from_poly(MultiPoly::var(&self.ring, idx)));
                }
                Err(err_at(
                    l,
                    c,
                    format!("undeclared base variable `{name}` in function expression"),
                ))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(err_at(l, c, "unbalanced `(`")),
                }
            }
            _ => Err(err_at(l, c, "expected a number, variable, or `(`")),
        }
    }

    fn sig_check(&self) -> &Arc<AlgebraSignature> {
        self.sig
    }
}

/// Parses a rational function or `exp(polynomial)` over the base variables.
pub fn parse_function(sig: &Arc<AlgebraSignature>, text: &str) -> Result<FunctionExpr> {
    parse_function_at(sig, text, 1)
}

fn parse_function_at(
    sig: &Arc<AlgebraSignature>,
    text: &str,
    line: usize,
) -> Result<FunctionExpr> {
    let toks = lex(text, line)?;
    let ring = sig.full_function_ring();
    // exp(...) wrapper
    if toks.len() >= 2
        && matches!(&toks[0].tok, Tok::Ident(n) if n == "exp")
        && toks[1].tok == Tok::LParen
        && toks.last().map(|s| &s.tok) == Some(&Tok::RParen)
    {
        let inner = &toks[2..toks.len() - 1];
        let mut p = FnParser {
            toks: inner,
            pos: 0,
            sig,
            ring: ring.clone(),
            line,
        };
        let e = p.expr()?;
        if p.pos != inner.len() {
            let (l, c) = p.here();
            return Err(err_at(l, c, "trailing input"));
        }
        if !e.is_polynomial() {
            return Err(err_at(line, 1, "exp expects a polynomial argument"));
        }
        let _ = p.sig_check();
        return Ok(FunctionExpr::ExpPoly(e.num().clone()));
    }
    let mut p = FnParser {
        toks: &toks,
        pos: 0,
        sig,
        ring,
        line,
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        let (l, c) = p.here();
        return Err(err_at(l, c, "trailing input"));
    }
    Ok(FunctionExpr::Rational(e))
}

// ---------------------------------------------------------------------------
// order syntax

/// Parses order syntax: `grevlex(v,...)`, `lex(v,...)`, chains with `>`
/// (block orders), `weight(v=w,...; <order>)`, or the shorthands `grevlex`,
/// `lex`, `elim`.
pub fn parse_order(sig: &Arc<AlgebraSignature>, text: &str) -> Result<OrderSpec> {
    let trimmed = text.trim();
    match trimmed {
        "grevlex" => return Ok(OrderSpec::default_for(sig)),
        "lex" => {
            return Ok(OrderSpec {
                term: TermOrder::Lex(sig.monomial_var_names()),
                module: ModuleLayer::PositionOverTerm { priority: None },
                t_elim: sig.has_localization(),
            })
        }
        "elim" => return Ok(OrderSpec::lex_elimination(sig)),
        _ => {}
    }
    let toks = lex(trimmed, 1)?;
    let mut pos = 0;
    let term = parse_order_chain(&toks, &mut pos)?;
    if pos != toks.len() {
        return Err(Error::InvalidOrder(format!("trailing input in `{trimmed}`")));
    }
    Ok(OrderSpec {
        term,
        module: ModuleLayer::PositionOverTerm { priority: None },
        t_elim: sig.has_localization(),
    })
}

fn parse_order_chain(toks: &[Sp], pos: &mut usize) -> Result<TermOrder> {
    let mut blocks = vec![parse_order_atom(toks, pos)?];
    while toks.get(*pos).map(|s| &s.tok) == Some(&Tok::Gt) {
        *pos += 1;
        blocks.push(parse_order_atom(toks, pos)?);
    }
    Ok(if blocks.len() == 1 {
        blocks.pop().unwrap()
    } else {
        TermOrder::Block(blocks)
    })
}

fn parse_order_atom(toks: &[Sp], pos: &mut usize) -> Result<TermOrder> {
    let bad = |msg: &str| Error::InvalidOrder(msg.into());
    let name = match toks.get(*pos).map(|s| s.tok.clone()) {
        Some(Tok::Ident(n)) => n,
        _ => return Err(bad("expected grevlex(...), lex(...), or weight(...)")),
    };
    *pos += 1;
    if toks.get(*pos).map(|s| &s.tok) != Some(&Tok::LParen) {
        return Err(bad("expected `(` after the order name"));
    }
    *pos += 1;
    match name.as_str() {
        "grevlex" | "lex" => {
            let mut vars = Vec::new();
            loop {
                match toks.get(*pos).map(|s| s.tok.clone()) {
                    Some(Tok::Ident(v)) => {
                        vars.push(v);
                        *pos += 1;
                    }
                    _ => return Err(bad("expected a variable name")),
                }
                match toks.get(*pos).map(|s| &s.tok) {
                    Some(Tok::Comma) => *pos += 1,
                    Some(Tok::RParen) => {
                        *pos += 1;
                        break;
                    }
                    _ => return Err(bad("expected `,` or `)`")),
                }
            }
            Ok(if name == "grevlex" {
                TermOrder::Grevlex(vars)
            } else {
                TermOrder::Lex(vars)
            })
        }
        "weight" => {
            let mut weights = Vec::new();
            loop {
                let v = match toks.get(*pos).map(|s| s.tok.clone()) {
                    Some(Tok::Ident(v)) => v,
                    _ => return Err(bad("expected `name=weight`")),
                };
                *pos += 1;
                if toks.get(*pos).map(|s| &s.tok) != Some(&Tok::Eq) {
                    return Err(bad("expected `=` in weight list"));
                }
                *pos += 1;
                let mut sign = 1i64;
                if toks.get(*pos).map(|s| &s.tok) == Some(&Tok::Minus) {
                    sign = -1;
                    *pos += 1;
                }
                let w = match toks.get(*pos).map(|s| s.tok.clone()) {
                    Some(Tok::Int(n)) => {
                        let w: i64 = (&n)
                            .try_into()
                            .map_err(|_| bad("weight out of range"))?;
                        w * sign
                    }
                    _ => return Err(bad("expected an integer weight")),
                };
                *pos += 1;
                weights.push((v, w));
                match toks.get(*pos).map(|s| &s.tok) {
                    Some(Tok::Comma) => *pos += 1,
                    Some(Tok::Semi) => {
                        *pos += 1;
                        break;
                    }
                    _ => return Err(bad("expected `,` or `;`")),
                }
            }
            let tie = parse_order_chain(toks, pos)?;
            if toks.get(*pos).map(|s| &s.tok) != Some(&Tok::RParen) {
                return Err(bad("expected `)` closing weight(...)"));
            }
            *pos += 1;
            Ok(TermOrder::Weight {
                weights,
                tie: Box::new(tie),
            })
        }
        other => Err(bad(&format!("unknown order kind `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// problem files

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let mut field = FieldSpec::Rationals;
    let mut rat_vars: Vec<String> = Vec::new();
    let mut poly_vars: Vec<String> = Vec::new();
    let mut rank: u32 = 1;
    let mut order_src: Option<(String, usize)> = None;
    let mut locpoly_src: Option<(String, usize)> = None;
    let mut function_src: Option<(String, usize)> = None;
    let mut gen_srcs: Vec<(String, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match key {
            "field" => {
                field = parse_field(rest, lineno)?;
            }
            "ratvars" => {
                rat_vars = rest.split_whitespace().map(|s| s.to_string()).collect();
            }
            "polyvars" => {
                poly_vars = rest.split_whitespace().map(|s| s.to_string()).collect();
            }
            "rank" => {
                rank = rest
                    .parse()
                    .map_err(|_| err_at(lineno, 1, "rank must be a positive integer"))?;
            }
            "order" => order_src = Some((rest.to_string(), lineno)),
            "locpoly" => locpoly_src = Some((rest.to_string(), lineno)),
            "function" => function_src = Some((rest.to_string(), lineno)),
            "gen" => gen_srcs.push((rest.to_string(), lineno)),
            other => {
                return Err(err_at(
                    lineno,
                    1,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }

    let base = field.base()?;
    let sig = AlgebraSignature::mixed(base, rat_vars.clone(), poly_vars.clone(), rank)?;
    let loc_poly = match &locpoly_src {
        None => None,
        Some((src, line)) => Some(parse_polyx_at(&sig, src, *line)?),
    };
    let sig_full = match &loc_poly {
        None => sig.clone(),
        Some(f) => sig.with_localization("T", f.clone())?,
    };
    let order = match &order_src {
        None => None,
        Some((src, _)) => Some(parse_order(&sig_full, src)?),
    };
    let function = match &function_src {
        None => None,
        Some((src, line)) => Some(parse_function_at(&sig, src, *line)?),
    };
    let mut generators = Vec::new();
    for (src, line) in &gen_srcs {
        generators.push(parse_generator_at(&sig_full, src, *line)?);
    }
    Ok(ProblemFile {
        field,
        rat_vars,
        poly_vars,
        rank,
        order,
        loc_poly,
        function,
        sig,
        sig_full,
        generators,
    })
}

fn parse_field(text: &str, line: usize) -> Result<FieldSpec> {
    let t = text.trim();
    if t == "QQ" {
        return Ok(FieldSpec::Rationals);
    }
    if let Some(rest) = t.strip_prefix("Fp(") {
        if let Some(num) = rest.strip_suffix(')') {
            let p: u64 = num
                .trim()
                .parse()
                .map_err(|_| err_at(line, 1, "bad prime in Fp(...)"))?;
            BaseField::prime(p)?;
            return Ok(FieldSpec::Prime(p));
        }
    }
    Err(err_at(line, 1, format!("unknown field `{t}` (use QQ or Fp(p))")))
}

/// Writes a problem file; `format(parse(text))` reparses to the same
/// generators.
pub fn format_problem(p: &ProblemFile) -> String {
    let mut out = String::new();
    out.push_str(&format!("field {}\n", p.field));
    if !p.rat_vars.is_empty() {
        out.push_str(&format!("ratvars {}\n", p.rat_vars.join(" ")));
    }
    out.push_str(&format!("polyvars {}\n", p.poly_vars.join(" ")));
    out.push_str(&format!("rank {}\n", p.rank));
    if let Some(ord) = &p.order {
        out.push_str(&format!("order {}\n", ord.term));
    }
    if let Some(f) = &p.loc_poly {
        out.push_str(&format!("locpoly {}\n", f.to_weyl(&p.sig)));
    }
    if let Some(f) = &p.function {
        out.push_str(&format!("function {f}\n"));
    }
    for g in &p.generators {
        if p.rank == 1 {
            out.push_str(&format!("gen {}\n", g.component(1)));
        } else {
            out.push_str(&format!("gen {g}\n"));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// annihilator constructors

/// `{q D_v + q_v : v among the base variables}` — each operator annihilates
/// `1/q`, and for the rank-1 connection these generate its full rational
/// annihilator. `q` is a polynomial in all base variables (rational first).
pub fn annihilator_of_rational(
    sig: &Arc<AlgebraSignature>,
    q: &MultiPoly,
) -> Result<Vec<WeylElement>> {
    if q.is_zero() {
        return Err(Error::invalid("q must be nonzero"));
    }
    let qw = WeylElement::from_full_poly(sig, q)?;
    let mut out = Vec::new();
    for &(_, target) in &sig.layout().derivs {
        let idx = full_ring_index(sig, target);
        let dv = WeylElement::deriv(sig, target)?;
        let qv = WeylElement::from_full_poly(sig, &q.derivative(idx))?;
        out.push(multiply(&qw, &dv)?.add(&qv));
    }
    Ok(out)
}

/// `{D_v - g_v : v among the base variables}` — the annihilator of `e^g`.
pub fn annihilator_of_exp(
    sig: &Arc<AlgebraSignature>,
    g: &MultiPoly,
) -> Result<Vec<WeylElement>> {
    let mut out = Vec::new();
    for &(_, target) in &sig.layout().derivs {
        let idx = full_ring_index(sig, target);
        let dv = WeylElement::deriv(sig, target)?;
        let gv = WeylElement::from_full_poly(sig, &g.derivative(idx))?;
        out.push(dv.sub(&gv));
    }
    Ok(out)
}

fn full_ring_index(sig: &AlgebraSignature, target: DerivTarget) -> usize {
    match target {
        DerivTarget::Rational(j) => j,
        DerivTarget::Poly(i) => sig.rational_vars().len() + i,
    }
}
