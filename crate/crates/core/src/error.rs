use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("empty input set")]
    EmptySet,

    #[error("input is not positive: {0}")]
    NotPositive(String),

    #[error("kernel is not an HS-kernel (classified as {0})")]
    NotHs(String),

    #[error("kernel is not an HO-kernel (classified as {0})")]
    NotHo(String),

    #[error("expression is not built from L-monomials by products and intersections: {0}")]
    NotInOmega(String),

    #[error("skeleton is empty: {0}")]
    EmptySkeleton(String),

    #[error("{count} monomials exceed the pattern enumeration cap of {cap}")]
    SizeCap { count: usize, cap: usize },

    #[error("rank reduction and domination oracle disagree: {0}")]
    Disagreement(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("monomial is constant; an L-monomial needs a nonzero exponent vector")]
    ConstantMonomial,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
