use thiserror::Error;

use crate::weyl::WeylElement;

/// Which resource limit a Gröbner run exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    Pairs,
    Terms,
    Timeout,
}

impl std::fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BudgetKind::Pairs => write!(f, "pair limit"),
            BudgetKind::Terms => write!(f, "term limit"),
            BudgetKind::Timeout => write!(f, "timeout"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("undeclared variable `{name}`")]
    UndeclaredVariable { name: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("the zero element has no degree")]
    ZeroElement,

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("expected a reduced Gröbner basis")]
    NotReduced,

    #[error("module is not of finite rank: {0}")]
    NotFiniteRank(String),

    /// A resource budget was exhausted; carries the partial basis computed so
    /// far so callers can report it.
    #[error("budget exceeded ({kind}) after {pairs} pairs, basis size {}", partial.len())]
    BudgetExceeded {
        kind: BudgetKind,
        pairs: usize,
        partial: Vec<WeylElement>,
    },

    #[error("no saturation certificate for `{generator}` within k <= {k_max}")]
    CertificationFailed { generator: String, k_max: u32 },

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Exit-code classification used by the CLI: parse/usage errors map to 2,
    /// computational errors to 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UndeclaredVariable { .. }
                | Error::InvalidSignature(_)
                | Error::InvalidOrder(_)
        )
    }
}
