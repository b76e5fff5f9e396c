use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::expr::eval_expr;
use super::numeric::NumericReal;
use super::rational::Rational;
use super::symbolic::SymbolicReal;
use super::{NumkitError, DEFAULT_PRECISION};

/// Values for basis symbols.
pub type Assignment = BTreeMap<String, NumericReal>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Symbolic,
    Numeric,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Symbolic => "symbolic",
            Tier::Numeric => "numeric",
        })
    }
}

impl FromStr for Tier {
    type Err = NumkitError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symbolic" => Ok(Tier::Symbolic),
            "numeric" => Ok(Tier::Numeric),
            _ => Err(NumkitError::Parse(format!("unknown tier `{s}`"))),
        }
    }
}

/// A real in either tier.
#[derive(Clone, Debug)]
pub enum Real {
    Symbolic(SymbolicReal),
    Numeric(NumericReal),
}

impl Real {
    pub fn tier(&self) -> Tier {
        match self {
            Real::Symbolic(_) => Tier::Symbolic,
            Real::Numeric(_) => Tier::Numeric,
        }
    }

    pub fn rational(r: Rational) -> Self {
        Real::Symbolic(SymbolicReal::from_rational(r))
    }

    /// Symbolic text in the canonical form, or a numeric expression such as
    /// `1+sqrt(2)` evaluated at `precision` bits.
    pub fn parse(text: &str, tier: Tier, precision: usize) -> Result<Self, NumkitError> {
        match tier {
            Tier::Symbolic => text.parse().map(Real::Symbolic),
            Tier::Numeric => eval_expr(text, precision).map(Real::Numeric),
        }
    }

    pub fn as_symbolic(&self) -> Option<&SymbolicReal> {
        match self {
            Real::Symbolic(x) => Some(x),
            Real::Numeric(_) => None,
        }
    }

    pub fn as_numeric(&self) -> Option<&NumericReal> {
        match self {
            Real::Numeric(x) => Some(x),
            Real::Symbolic(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Symbolic(x) => x.is_zero(),
            Real::Numeric(x) => x.is_zero(),
        }
    }

    /// `None` when the sign of a symbolic sum is not decided by its form.
    pub fn is_positive(&self) -> Option<bool> {
        match self {
            Real::Symbolic(x) => x.is_positive(),
            Real::Numeric(x) => Some(x.is_positive()),
        }
    }

    pub fn mul(&self, other: &Real) -> Result<Real, NumkitError> {
        match (self, other) {
            (Real::Symbolic(a), Real::Symbolic(b)) => Ok(Real::Symbolic(a * b)),
            (Real::Numeric(a), Real::Numeric(b)) => Ok(Real::Numeric(a.mul(b))),
            _ => Err(NumkitError::TierMismatch),
        }
    }

    pub fn powi(&self, n: i32) -> Result<Real, NumkitError> {
        match self {
            Real::Symbolic(x) => x
                .checked_powi(n)
                .map(Real::Symbolic)
                .ok_or_else(|| NumkitError::Domain(format!("`{x}` has no symbolic inverse"))),
            Real::Numeric(x) => x.powi(n).map(Real::Numeric),
        }
    }

    /// Numeric value; symbolic values need every symbol assigned.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<NumericReal, NumkitError> {
        match self {
            Real::Symbolic(x) => x.eval(assignment),
            Real::Numeric(x) => Ok(x.clone()),
        }
    }

    pub fn to_f64(&self, assignment: &Assignment) -> Result<f64, NumkitError> {
        self.evaluate(assignment).map(|x| x.to_f64())
    }

    /// Canonical text: the symbolic form, or the decimal expansion.
    pub fn canonical(&self) -> String {
        match self {
            Real::Symbolic(x) => x.to_string(),
            Real::Numeric(x) => x.to_decimal_string(),
        }
    }

    /// Exact equality for symbolic values; `None` in the numeric tier.
    pub fn exact_eq(&self, other: &Real) -> Option<bool> {
        match (self, other) {
            (Real::Symbolic(a), Real::Symbolic(b)) => Some(a == b),
            _ => None,
        }
    }

    pub fn default_precision(&self) -> usize {
        match self {
            Real::Symbolic(_) => DEFAULT_PRECISION,
            Real::Numeric(x) => x.precision(),
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl From<SymbolicReal> for Real {
    fn from(x: SymbolicReal) -> Self {
        Real::Symbolic(x)
    }
}

impl From<NumericReal> for Real {
    fn from(x: NumericReal) -> Self {
        Real::Numeric(x)
    }
}
