//! Exact symbolic calculus on phase space.

mod expr;
mod parse;
mod space;

pub use expr::{rat, rational_to_f64, ExpForm, Monomial, PhaseExpr, PhasePoint, Rational, TermKey};
pub use parse::{parse_expr, parse_expr_with, parse_rational, ExprSyntaxError};
pub use space::{PhaseSpace, VarKind, Variable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` has no conjugate")]
    NoConjugate(String),
    #[error("no value assigned to `{0}`")]
    MissingValue(String),
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("invalid phase space: {0}")]
    InvalidSpace(String),
}
