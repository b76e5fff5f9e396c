//! Rational linear independence of finite sets of reals, and of word-ball
//! truncations of finitely generated multiplicative groups.
//!
//! A cyclic group `<s>` is additively independent exactly when `s` is
//! transcendental, so the polynomial condition on generators is checked
//! here in its additive form on each slice.

mod group;

pub use group::{expand_group, words_in_ball, GroupElement, GroupSlice};

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::numkit::linalg::integer_kernel_vector;
use crate::numkit::{
    find_integer_relation, IntegerRelation, Monomial, NumericReal, NumkitError, Rational, Real, RelationSearch,
    SymbolicReal, Tier, DEFAULT_PRECISION,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QindepError {
    #[error(transparent)]
    Numkit(#[from] NumkitError),
    #[error("empty input")]
    Empty,
    #[error("inputs mix symbolic and numeric values; evaluate the symbols first")]
    MixedTiers,
    #[error("input {0} is zero")]
    Zero(usize),
    #[error("inputs {0} and {1} are equal")]
    Duplicate(usize, usize),
    #[error("generator {0} is not positive")]
    NonPositiveGenerator(usize),
    #[error("generator {0} has no symbolic inverse")]
    NotInvertible(usize),
    #[error("group words collide within tolerance: {}", format_collisions(.0))]
    Collision(Vec<(Vec<i32>, Vec<i32>)>),
}

fn format_collisions(pairs: &[(Vec<i32>, Vec<i32>)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a:?}~{b:?}")).collect::<Vec<_>>().join(", ")
}

/// Search limits for the numeric tier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub max_coeff: u64,
    pub precision_bits: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { max_coeff: 10_000, precision_bits: DEFAULT_PRECISION }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndependenceStatus {
    IndependentExact,
    Dependent,
    NoneFoundWithinBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceVerdict {
    pub status: IndependenceStatus,
    pub relation: Option<IntegerRelation>,
    pub bounds: Bounds,
}

impl IndependenceVerdict {
    /// Independent, or at least no relation found.
    pub fn is_independent(&self) -> bool {
        self.status != IndependenceStatus::Dependent
    }
}

fn common_tier(xs: &[Real]) -> Result<Tier, QindepError> {
    let first = xs.first().ok_or(QindepError::Empty)?.tier();
    if xs.iter().any(|x| x.tier() != first) {
        return Err(QindepError::MixedTiers);
    }
    Ok(first)
}

pub fn check_q_independence(xs: &[Real], bounds: Bounds) -> Result<IndependenceVerdict, QindepError> {
    match common_tier(xs)? {
        Tier::Symbolic => {
            let sym: Vec<&SymbolicReal> = xs.iter().filter_map(Real::as_symbolic).collect();
            check_symbolic(&sym, bounds)
        }
        Tier::Numeric => {
            let num: Vec<NumericReal> = xs.iter().filter_map(Real::as_numeric).cloned().collect();
            check_numeric(&num, bounds)
        }
    }
}

fn check_symbolic(xs: &[&SymbolicReal], bounds: Bounds) -> Result<IndependenceVerdict, QindepError> {
    for (i, x) in xs.iter().enumerate() {
        if x.is_zero() {
            return Err(QindepError::Zero(i));
        }
        if let Some(j) = xs[..i].iter().position(|y| y == x) {
            return Err(QindepError::Duplicate(j, i));
        }
    }
    let coords: Vec<_> = xs.iter().map(|x| x.coordinates()).collect();
    let basis: BTreeSet<&Monomial> = coords.iter().flat_map(|c| c.keys()).collect();
    let columns: Vec<Vec<Rational>> = coords
        .iter()
        .map(|c| basis.iter().map(|m| c.get(*m).cloned().unwrap_or_default()).collect())
        .collect();
    Ok(match integer_kernel_vector(&columns) {
        None => IndependenceVerdict { status: IndependenceStatus::IndependentExact, relation: None, bounds },
        Some(k) => IndependenceVerdict {
            status: IndependenceStatus::Dependent,
            relation: Some(IntegerRelation { coefficients: k, residual: 0.0 }),
            bounds,
        },
    })
}

fn check_numeric(xs: &[NumericReal], bounds: Bounds) -> Result<IndependenceVerdict, QindepError> {
    for (i, x) in xs.iter().enumerate() {
        if x.is_zero() {
            return Err(QindepError::Zero(i));
        }
        if let Some(j) = xs[..i].iter().position(|y| y == x) {
            return Err(QindepError::Duplicate(j, i));
        }
    }
    Ok(match find_integer_relation(xs, bounds.max_coeff, bounds.precision_bits)? {
        RelationSearch::Found(r) => {
            IndependenceVerdict { status: IndependenceStatus::Dependent, relation: Some(r), bounds }
        }
        RelationSearch::NoneFound { .. } => {
            IndependenceVerdict { status: IndependenceStatus::NoneFoundWithinBounds, relation: None, bounds }
        }
    })
}

/// Independence of all elements of a group slice.
pub fn check_group_independence(slice: &GroupSlice, bounds: Bounds) -> Result<IndependenceVerdict, QindepError> {
    check_q_independence(&slice.values(), bounds)
}

/// `sum k_i x_i` for a symbolic relation, for checking certificates.
pub fn symbolic_relation_value(xs: &[SymbolicReal], k: &[BigInt]) -> SymbolicReal {
    xs.iter().zip(k).fold(SymbolicReal::zero(), |acc, (x, c)| &acc + &x.scale(&Rational::from_integer(c.clone())))
}
