//! Numeric substrate: exact rationals, symbolic reals over a declared basis
//! of algebraically independent symbols, high-precision floats, lattice
//! reduction and integer-relation search.

pub mod circle;
pub mod expr;
pub mod linalg;
pub mod lll;
pub mod numeric;
pub mod rational;
pub mod relation;
pub mod symbolic;

mod real;

pub use numeric::NumericReal;
pub use rational::Rational;
pub use real::{Assignment, Real, Tier};
pub use relation::{find_integer_relation, IntegerRelation, RelationSearch};
pub use symbolic::{sym_eval, Monomial, SymbolicReal};

/// Working precision in bits when none is given.
pub const DEFAULT_PRECISION: usize = 128;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumkitError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("symbol `{0}` has no assigned value")]
    UnassignedSymbol(String),
    #[error("precision: {0}")]
    Precision(String),
    #[error("insufficient precision: {required} bits requested but an input carries only {found}")]
    InsufficientPrecision { required: usize, found: usize },
    #[error("result is not finite")]
    NonFinite,
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("empty input")]
    EmptyInput,
    #[error("cannot combine a symbolic and a numeric value; evaluate the symbols first")]
    TierMismatch,
}
