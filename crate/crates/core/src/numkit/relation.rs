//! Integer-relation detection by lattice reduction.
//!
//! For inputs `x_1..x_n` the lattice is spanned by the rows
//! `e_i ++ [round(2^p * x_i)]`. A relation `sum k_i x_i = 0` gives a lattice
//! vector whose last coordinate is tiny, so after LLL it shows up among the
//! short vectors. A miss certifies only that nothing within the bounds was
//! found, never that the inputs are independent.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::lll::{default_delta, lll_reduce};
use super::linalg::normalize_sign;
use super::numeric::NumericReal;
use super::NumkitError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegerRelation {
    #[serde(with = "bigint_strings")]
    pub coefficients: Vec<BigInt>,
    /// `|sum k_i x_i|` at the inputs' precision.
    pub residual: f64,
}

impl IntegerRelation {
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.coefficients.iter().map(|k| k.abs()).max().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum RelationSearch {
    Found(IntegerRelation),
    NoneFound { max_coeff: u64, precision_bits: usize },
}

impl RelationSearch {
    pub fn relation(&self) -> Option<&IntegerRelation> {
        match self {
            RelationSearch::Found(r) => Some(r),
            RelationSearch::NoneFound { .. } => None,
        }
    }
}

/// `|sum k_i x_i|` evaluated at the inputs' precision.
pub fn relation_residual(xs: &[NumericReal], coefficients: &[BigInt]) -> Result<NumericReal, NumkitError> {
    let prec = xs.iter().map(NumericReal::precision).min().ok_or(NumkitError::EmptyInput)?;
    let mut acc = NumericReal::zero(prec)?;
    for (x, k) in xs.iter().zip(coefficients) {
        if k.is_zero() {
            continue;
        }
        acc = acc.add(&x.mul(&NumericReal::from_bigint(k, prec + 64)?));
    }
    Ok(acc.abs())
}

/// Searches for `k != 0` with `|k_i| <= max_coeff` and
/// `|sum k_i x_i| <= 2^(-precision_bits/2) * max|x_i|`.
pub fn find_integer_relation(
    xs: &[NumericReal],
    max_coeff: u64,
    precision_bits: usize,
) -> Result<RelationSearch, NumkitError> {
    if xs.is_empty() {
        return Err(NumkitError::EmptyInput);
    }
    if max_coeff == 0 {
        return Err(NumkitError::Domain("max_coeff must be at least 1".into()));
    }
    if let Some(low) = xs.iter().find(|x| x.precision() < precision_bits) {
        return Err(NumkitError::InsufficientPrecision { required: precision_bits, found: low.precision() });
    }
    let n = xs.len();
    let scale = u32::try_from(precision_bits).map_err(|_| NumkitError::Precision("precision too large".into()))?;
    let basis: Vec<Vec<BigInt>> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut row = vec![BigInt::zero(); n + 1];
            row[i] = BigInt::from(1);
            row[n] = x.scaled_integer(scale);
            row
        })
        .collect();
    let reduced = lll_reduce(&basis, &default_delta())?;

    let prec = xs.iter().map(NumericReal::precision).min().unwrap_or(precision_bits);
    let max_abs = xs.iter().map(NumericReal::abs).fold(NumericReal::zero(prec)?, |m, x| {
        if x.cmp_value(&m).is_gt() { x } else { m }
    });
    let half = -((precision_bits / 2) as i32);
    let threshold = max_abs.mul(&NumericReal::from_i64(2, prec)?.powi(half)?);
    let bound = BigInt::from(max_coeff);

    let mut best: Option<(BigInt, IntegerRelation)> = None;
    for v in &reduced {
        let mut k: Vec<BigInt> = v[..n].to_vec();
        if k.iter().all(Zero::is_zero) {
            continue;
        }
        let size = k.iter().map(|c| c.abs()).max().unwrap_or_default();
        if size > bound {
            continue;
        }
        let residual = relation_residual(xs, &k)?;
        if residual.cmp_value(&threshold).is_gt() {
            continue;
        }
        if best.as_ref().is_some_and(|(s, _)| *s <= size) {
            continue;
        }
        normalize_sign(&mut k);
        best = Some((size, IntegerRelation { coefficients: k, residual: residual.to_f64() }));
    }
    Ok(match best {
        Some((_, r)) => RelationSearch::Found(r),
        None => RelationSearch::NoneFound { max_coeff, precision_bits },
    })
}

pub(crate) mod bigint_strings {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<serde_json::Value>::deserialize(d)?;
        raw.into_iter()
            .map(|v| match v {
                serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
                serde_json::Value::Number(n) => n.to_string().parse().map_err(serde::de::Error::custom),
                _ => Err(serde::de::Error::custom("expected integer")),
            })
            .collect()
    }
}

/// Convenience: small coefficients as `i64` when they fit.
pub fn coefficients_i64(r: &IntegerRelation) -> Option<Vec<i64>> {
    r.coefficients.iter().map(ToPrimitive::to_i64).collect()
}
