//! Exact symbolic computation in mixed Weyl algebras.
//!
//! The crate provides normal-ordered arithmetic in free modules over mixed
//! Weyl algebras `W_{t,x}(t)` — optionally extended by a Rabinowitsch
//! variable `T` attached to a polynomial `f` — together with a Buchberger
//! engine for left modules, a holonomicity test based on leading monomials,
//! singular-locus computation through commutative saturation, and a
//! truncated-saturation approximation of the partial Weyl closure.
//!
//! The usual entry points are [`problem`] (text format for problems and
//! operators), [`closure::partial_closure`] and the verification oracles in
//! [`weyl::action`].

pub mod closure;
pub mod coef;
pub mod error;
pub mod groebner;
pub mod holonomy;
pub mod gcd;
pub mod order;
pub mod poly;
pub mod problem;
pub mod ratfun;
pub mod scalar;
pub mod symbol;
pub mod weyl;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
