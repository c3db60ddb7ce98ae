use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A space could not be built because its data breaks a structural invariant.
    #[error("invalid space: {0}")]
    Construction(String),

    #[error("point {point} is outside the domain {domain}")]
    Domain { point: String, domain: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The requested profile needs data the space does not carry.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("infeasible control matrix: zero denominator with positive numerator at triple ({i}, {j}, {k})")]
    Infeasible { i: usize, j: usize, k: usize },

    #[error("orbit left the domain at step {step}: T(x) = {value} is outside {domain}")]
    DomainEscape {
        step: usize,
        value: String,
        domain: String,
    },

    #[error("unknown gallery id {id:?}; valid ids: {valid}")]
    UnknownExample { id: String, valid: String },

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("malformed space document: {0}")]
    Format(String),
}
