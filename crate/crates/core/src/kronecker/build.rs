use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use std::collections::BTreeSet;

use super::KroneckerError;
use crate::numkit::rational::format_rational;
use crate::numkit::{Assignment, Monomial, NumericReal, Rational, Real, RelationSearch, SymbolicReal, Tier};
use crate::qindep::{check_group_independence, check_q_independence, Bounds, GroupSlice, IndependenceStatus};

#[derive(Clone, Debug, PartialEq)]
pub struct BuildConfig {
    pub bounds: Bounds,
    pub seed: u64,
    /// Rejection rounds allowed in the numeric tier.
    pub max_rounds: usize,
    pub symbol_prefix: String,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self { bounds: Bounds::default(), seed: 0, max_rounds: 10, symbol_prefix: "tau".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Each point carries its own fresh symbol, declared to range over `(0, 1)`.
    SymbolicFreshTranscendental { symbols: Vec<String>, status: IndependenceStatus },
    /// No relation within `bounds` on the realized set.
    NumericNoRelation { bounds: Bounds, rounds: usize },
}

#[derive(Clone, Debug)]
pub struct KroneckerSetSpec {
    pub points: Vec<Real>,
    pub certificate: Certificate,
    pub slice: GroupSlice,
    /// `L = { h x_i : h in slice }`, ordered by slice element then point.
    pub realized: Vec<Real>,
}

impl KroneckerSetSpec {
    pub fn tier(&self) -> Tier {
        self.slice.tier
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "points": self.points.iter().map(Real::canonical).collect::<Vec<_>>(),
            "certificate": self.certificate,
            "slice": self.slice.to_json(),
            "tier": self.tier(),
        })
    }

    /// Values for the fresh symbols drawn uniformly from `(0, 1)`.
    pub fn fresh_assignment(&self, seed: u64, precision: usize) -> Result<Assignment, KroneckerError> {
        let mut out = Assignment::new();
        if let Certificate::SymbolicFreshTranscendental { symbols, .. } = &self.certificate {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            for s in symbols {
                out.insert(s.clone(), NumericReal::from_rational(&open_unit(&mut rng), precision)?);
            }
        }
        Ok(out)
    }
}

/// Uniform in `(0, 1)` with 128 random bits.
fn open_unit(rng: &mut impl Rng) -> Rational {
    loop {
        let r: u128 = rng.gen();
        if r != 0 {
            return Rational::new(BigInt::from(r), BigInt::one() << 128);
        }
    }
}

fn realize(points: &[Real], slice: &GroupSlice) -> Result<Vec<Real>, KroneckerError> {
    let mut out = Vec::with_capacity(points.len() * slice.len());
    for h in slice.values() {
        for x in points {
            out.push(h.mul(x)?);
        }
    }
    Ok(out)
}

fn slice_symbols(slice: &GroupSlice) -> BTreeSet<String> {
    slice
        .values()
        .iter()
        .filter_map(|v| v.as_symbolic().map(|s| s.symbols().map(str::to_string).collect::<Vec<_>>()))
        .flatten()
        .collect()
}

/// Points `x_i` with `|x_i - y_i| < delta` such that the union of the
/// dilates `h x_i` over the slice is rationally independent.
pub fn build_kronecker_points(
    targets: &[Rational],
    delta: &Rational,
    slice: &GroupSlice,
    cfg: &BuildConfig,
) -> Result<KroneckerSetSpec, KroneckerError> {
    if targets.is_empty() {
        return Err(KroneckerError::Empty);
    }
    if !delta.is_positive() {
        return Err(KroneckerError::BadDelta);
    }
    let verdict = check_group_independence(slice, cfg.bounds)?;
    if !verdict.is_independent() {
        let rel = verdict
            .relation
            .map(|r| r.coefficients.iter().map(ToString::to_string).collect())
            .unwrap_or_default();
        return Err(KroneckerError::DependentSlice(rel));
    }
    match slice.tier {
        Tier::Symbolic => build_symbolic(targets, delta, slice, cfg),
        Tier::Numeric => build_numeric(targets, delta, slice, cfg),
    }
}

fn build_symbolic(
    targets: &[Rational],
    delta: &Rational,
    slice: &GroupSlice,
    cfg: &BuildConfig,
) -> Result<KroneckerSetSpec, KroneckerError> {
    let taken = slice_symbols(slice);
    let mut symbols = Vec::with_capacity(targets.len());
    let mut i = 1;
    while symbols.len() < targets.len() {
        let name = format!("{}_{}", cfg.symbol_prefix, i);
        if !taken.contains(&name) {
            symbols.push(name);
        }
        i += 1;
    }
    let half = delta / Rational::from_integer(2.into());
    let points: Vec<Real> = targets
        .iter()
        .zip(&symbols)
        .map(|(y, s)| Real::Symbolic(SymbolicReal::from_terms(y.clone(), [(Monomial::symbol(s), half.clone())])))
        .collect();
    let realized = realize(&points, slice)?;
    let verdict = check_q_independence(&realized, cfg.bounds)?;
    Ok(KroneckerSetSpec {
        points,
        certificate: Certificate::SymbolicFreshTranscendental { symbols, status: verdict.status },
        slice: slice.clone(),
        realized,
    })
}

fn build_numeric(
    targets: &[Rational],
    delta: &Rational,
    slice: &GroupSlice,
    cfg: &BuildConfig,
) -> Result<KroneckerSetSpec, KroneckerError> {
    let p = cfg.bounds.precision_bits;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut relations = Vec::new();
    for round in 1..=cfg.max_rounds {
        let mut points = Vec::with_capacity(targets.len());
        for y in targets {
            // uniform in (-1, 1)
            let u = open_unit(&mut rng) * Rational::from_integer(2.into()) - Rational::one();
            let x = y + delta * u;
            points.push(Real::Numeric(NumericReal::from_rational(&x, p)?));
        }
        let realized = realize(&points, slice)?;
        let xs: Vec<NumericReal> = realized.iter().filter_map(|r| r.as_numeric().cloned()).collect();
        match crate::numkit::find_integer_relation(&xs, cfg.bounds.max_coeff, p)? {
            RelationSearch::NoneFound { .. } => {
                return Ok(KroneckerSetSpec {
                    points,
                    certificate: Certificate::NumericNoRelation { bounds: cfg.bounds, rounds: round },
                    slice: slice.clone(),
                    realized,
                });
            }
            RelationSearch::Found(r) => relations.push(r.coefficients.iter().map(ToString::to_string).collect()),
        }
    }
    Err(KroneckerError::RetryBudget { rounds: cfg.max_rounds, relations })
}

#[derive(Clone, Debug)]
pub struct KornerPoints {
    pub points: Vec<Real>,
    /// `x_i = h^{2i} q_i`.
    pub q: Vec<Rational>,
}

impl KornerPoints {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "points": self.points.iter().map(Real::canonical).collect::<Vec<_>>(),
            "q": self.q.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }
}

/// `x_i = h^{2i} q_i` with `q_i` a dyadic rounding of `y_i / h^{2i}` at the
/// first scale `2^-k` below `delta / h^{2i}`. Symbols in `h` and in the
/// targets are evaluated through `assignment` to choose `q_i`.
pub fn korner_points(
    h: &Real,
    targets: &[Real],
    delta: &Rational,
    assignment: &Assignment,
) -> Result<KornerPoints, KroneckerError> {
    if !delta.is_positive() {
        return Err(KroneckerError::BadDelta);
    }
    let prec = crate::numkit::DEFAULT_PRECISION;
    let hv = h.evaluate(assignment)?.with_precision(prec)?;
    let dv = NumericReal::from_rational(delta, prec)?;
    let two = NumericReal::from_i64(2, prec)?;
    let mut points = Vec::with_capacity(targets.len());
    let mut qs = Vec::with_capacity(targets.len());
    for (idx, y) in targets.iter().enumerate() {
        if y.is_zero() {
            return Err(KroneckerError::ZeroTarget(idx));
        }
        let e = 2 * (idx as i32 + 1);
        let hp = hv.powi(e)?;
        let ratio = y.evaluate(assignment)?.with_precision(prec)?.div(&hp)?;
        let window = dv.div(&hp.abs())?;
        let mut k: u32 = 0;
        while two.powi(-(k as i32))?.cmp_value(&window).is_ge() {
            k += 1;
        }
        let mut m = ratio.scaled_integer(k);
        while m.is_zero() {
            k += 1;
            m = ratio.scaled_integer(k);
        }
        let q = Rational::new(m, BigInt::one() << k as usize);
        points.push(h.powi(e)?.mul(&Real::rational(q.clone()).coerce(h.tier(), prec)?)?);
        qs.push(q);
    }
    Ok(KornerPoints { points, q: qs })
}

trait Coerce: Sized {
    fn coerce(self, tier: Tier, precision: usize) -> Result<Real, KroneckerError>;
}

impl Coerce for Real {
    fn coerce(self, tier: Tier, precision: usize) -> Result<Real, KroneckerError> {
        Ok(match (tier, self) {
            (Tier::Numeric, Real::Symbolic(s)) => {
                Real::Numeric(NumericReal::from_rational(s.as_rational().expect("rational"), precision)?)
            }
            (_, r) => r,
        })
    }
}
