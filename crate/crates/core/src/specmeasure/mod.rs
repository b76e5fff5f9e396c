//! Finite positive measures on the line: atoms at exact or floating
//! positions plus piecewise-constant densities.
//!
//! The symbolic tier keeps atom positions as [`SymbolicReal`]s, so equality
//! of positions is decided exactly. The numeric tier stores `f64` positions
//! and treats two positions within [`EPS_POS`] of each other as a collision
//! that must be resolved explicitly.

mod compare;
mod group;
mod metric;
mod ops;

pub use compare::{
    abs_continuity_test, equivalence_test, overlap_fraction, self_similarity_scales, singularity_test,
    CommonMass, OverlapReport, SingularityVerdict,
};
pub use group::{realize, structural_self_similarity, GroupMeasure, StructuralVerdict};
pub use metric::{calkin_wilf, weak_distance, MetricConfig};
pub use ops::{bochner, mix, restrict, scale_measure, symmetrize, translate_measure};

use std::cmp::Ordering;
use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::numkit::expr::eval_expr;
use crate::numkit::rational::{format_rational, parse_rational, rational_from_f64, rational_to_f64};
use crate::numkit::{Assignment, NumkitError, Rational, Real, SymbolicReal, Tier, DEFAULT_PRECISION};
use crate::qindep::QindepError;

/// Numeric positions closer than this are treated as colliding.
pub const EPS_POS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error(transparent)]
    Numkit(#[from] NumkitError),
    #[error(transparent)]
    Group(#[from] QindepError),
    #[error("atom weights must be positive")]
    NonPositiveWeight,
    #[error("density piece [{0}, {1}) with level {2} is invalid")]
    BadPiece(f64, f64, f64),
    #[error("atoms at {0} and {1} are closer than {EPS_POS:e} without being equal")]
    NearCollision(String, String),
    #[error("scale factor is zero")]
    ZeroScale,
    #[error("{0} cannot be applied to a measure in the {1} tier; evaluate the symbols first")]
    TierMismatch(String, Tier),
    #[error("mixture weights sum to {0}, not 1")]
    WeightSum(f64),
    #[error("{0} measures but {1} weights")]
    LengthMismatch(usize, usize),
    #[error("mixture weights must be positive")]
    NonPositiveMixtureWeight,
    #[error("empty mixture")]
    EmptyMixture,
    #[error("the interval [{0}, {1}] has zero mass")]
    ZeroMassInterval(f64, f64),
    #[error("measure has support outside [{0}, {1}]")]
    OutsideInterval(f64, f64),
    #[error("an atom sits at 0")]
    AtomAtZero,
    #[error("measure has no atoms")]
    NoAtoms,
    #[error("weight decay must lie in (0, 1), got {0}")]
    BadDecay(String),
    #[error("measure must be purely atomic")]
    NotAtomic,
    #[error("truncated group measure has colliding atoms: {}", .0.join("; "))]
    GroupCollision(Vec<String>),
    #[error("metric depth must be at least 1")]
    ZeroDepth,
    #[error("invalid measure JSON: {0}")]
    Json(String),
}

/// An atom position.
#[derive(Clone, Debug, PartialEq)]
pub enum Position {
    Exact(SymbolicReal),
    Float(f64),
}

/// How two positions relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coincidence {
    Same,
    /// Within [`EPS_POS`] but not confirmed equal.
    Near,
    Apart,
}

impl Position {
    pub fn rational(r: Rational) -> Self {
        Position::Exact(SymbolicReal::from_rational(r))
    }

    pub fn tier(&self) -> Tier {
        match self {
            Position::Exact(_) => Tier::Symbolic,
            Position::Float(_) => Tier::Numeric,
        }
    }

    /// Numeric value; fails when symbolic terms remain.
    pub fn to_f64(&self) -> Result<f64, MeasureError> {
        match self {
            Position::Float(x) => Ok(*x),
            Position::Exact(s) => match s.as_rational() {
                Some(r) => Ok(rational_to_f64(r)),
                None => {
                    let name = s.symbols().next().unwrap_or_default().to_string();
                    Err(NumkitError::UnassignedSymbol(name).into())
                }
            },
        }
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<f64, MeasureError> {
        match self {
            Position::Float(x) => Ok(*x),
            Position::Exact(s) => Ok(s.eval(assignment)?.to_f64()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Position::Float(x) => *x == 0.0,
            Position::Exact(s) => s.is_zero(),
        }
    }

    /// Exact comparison where possible. A float meeting a symbolic value is
    /// lifted to the rational it represents; a value with symbolic terms is
    /// never rational, so it is apart from every float.
    pub fn coincide(&self, other: &Position) -> Coincidence {
        match (self, other) {
            (Position::Exact(a), Position::Exact(b)) => {
                if a == b {
                    Coincidence::Same
                } else {
                    Coincidence::Apart
                }
            }
            (Position::Float(a), Position::Float(b)) => float_coincide(*a, *b),
            (Position::Exact(s), Position::Float(x)) | (Position::Float(x), Position::Exact(s)) => {
                match (s.as_rational(), rational_from_f64(*x)) {
                    (Some(r), Some(lifted)) if *r == lifted => Coincidence::Same,
                    (Some(r), _) => {
                        if (rational_to_f64(r) - x).abs() <= EPS_POS {
                            Coincidence::Near
                        } else {
                            Coincidence::Apart
                        }
                    }
                    (None, _) => Coincidence::Apart,
                }
            }
        }
    }

    fn sort_cmp(&self, other: &Position) -> Ordering {
        match (self, other) {
            (Position::Float(a), Position::Float(b)) => a.total_cmp(b),
            (Position::Exact(a), Position::Exact(b)) => a.cmp(b),
            (Position::Exact(_), Position::Float(_)) => Ordering::Less,
            (Position::Float(_), Position::Exact(_)) => Ordering::Greater,
        }
    }

    pub fn canonical(&self) -> String {
        match self {
            Position::Exact(s) => s.to_string(),
            Position::Float(x) => format!("{x}"),
        }
    }

    /// Parses a position in the given tier. Numeric positions accept plain
    /// decimals or expressions such as `sqrt(2)`.
    pub fn parse(text: &str, tier: Tier) -> Result<Self, MeasureError> {
        match tier {
            Tier::Symbolic => Ok(Position::Exact(text.parse()?)),
            Tier::Numeric => match text.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Position::Float(x)),
                _ => Ok(Position::Float(eval_expr(text, DEFAULT_PRECISION)?.to_f64())),
            },
        }
    }

    /// Converts a scalar to a position in `tier`.
    pub fn from_real(x: &Real, tier: Tier) -> Result<Self, MeasureError> {
        match (tier, x) {
            (Tier::Symbolic, Real::Symbolic(s)) => Ok(Position::Exact(s.clone())),
            (Tier::Numeric, Real::Numeric(n)) => Ok(Position::Float(n.to_f64())),
            (Tier::Numeric, Real::Symbolic(s)) => match s.as_rational() {
                Some(r) => Ok(Position::Float(rational_to_f64(r))),
                None => Err(MeasureError::TierMismatch(format!("`{s}`"), tier)),
            },
            (Tier::Symbolic, Real::Numeric(_)) => Err(MeasureError::TierMismatch(format!("`{x}`"), tier)),
        }
    }
}

fn float_coincide(a: f64, b: f64) -> Coincidence {
    if a == b {
        Coincidence::Same
    } else if (a - b).abs() <= EPS_POS {
        Coincidence::Near
    } else {
        Coincidence::Apart
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub pos: Position,
    pub w: Rational,
}

/// Constant density `level` on `[l, u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub l: f64,
    pub u: f64,
    pub level: f64,
}

impl Piece {
    pub fn mass(&self) -> f64 {
        self.level * (self.u - self.l)
    }
}

/// Atoms (sorted, with distinct positions) plus disjoint density pieces
/// (sorted, adjacent pieces with equal levels merged).
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    tier: Tier,
    atoms: Vec<Atom>,
    density: Vec<Piece>,
}

impl Measure {
    pub fn zero(tier: Tier) -> Self {
        Self { tier, atoms: Vec::new(), density: Vec::new() }
    }

    /// Builds a normalized measure: atoms at equal positions merge, density
    /// pieces are made disjoint by summing overlapping levels.
    pub fn new(tier: Tier, atoms: Vec<Atom>, density: Vec<Piece>) -> Result<Self, MeasureError> {
        let atoms = atoms
            .into_iter()
            .map(|a| Ok(Atom { pos: Self::coerce(&a.pos, tier)?, w: a.w }))
            .collect::<Result<Vec<_>, MeasureError>>()?;
        Ok(Self { tier, atoms: normalize_atoms(atoms)?, density: normalize_density(density)? })
    }

    fn coerce(pos: &Position, tier: Tier) -> Result<Position, MeasureError> {
        match (pos, tier) {
            (Position::Exact(s), Tier::Numeric) => match s.as_rational() {
                Some(r) => Ok(Position::Float(rational_to_f64(r))),
                None => Err(MeasureError::TierMismatch(format!("position `{s}`"), tier)),
            },
            (Position::Float(x), Tier::Symbolic) => {
                let r = rational_from_f64(*x).ok_or(NumkitError::NonFinite)?;
                Ok(Position::rational(r))
            }
            _ => Ok(pos.clone()),
        }
    }

    pub fn atomic(tier: Tier, atoms: Vec<(Position, Rational)>) -> Result<Self, MeasureError> {
        Self::new(tier, atoms.into_iter().map(|(pos, w)| Atom { pos, w }).collect(), Vec::new())
    }

    /// Symbolic-tier atoms from canonical text positions.
    pub fn exact(atoms: &[(&str, Rational)]) -> Result<Self, MeasureError> {
        let parsed = atoms
            .iter()
            .map(|(p, w)| Ok((Position::parse(p, Tier::Symbolic)?, w.clone())))
            .collect::<Result<Vec<_>, MeasureError>>()?;
        Self::atomic(Tier::Symbolic, parsed)
    }

    pub fn floats(atoms: &[(f64, Rational)]) -> Result<Self, MeasureError> {
        Self::atomic(Tier::Numeric, atoms.iter().map(|(x, w)| (Position::Float(*x), w.clone())).collect())
    }

    pub fn density_only(tier: Tier, pieces: Vec<Piece>) -> Result<Self, MeasureError> {
        Self::new(tier, Vec::new(), pieces)
    }

    pub fn tier(&self) -> Tier {
        self.tier
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &[Piece] {
        &self.density
    }

    pub fn is_atomic(&self) -> bool {
        self.density.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_empty()
    }

    pub fn atomic_mass(&self) -> Rational {
        self.atoms.iter().map(|a| &a.w).sum()
    }

    pub fn density_mass(&self) -> f64 {
        self.density.iter().map(Piece::mass).sum()
    }

    pub fn total_mass(&self) -> f64 {
        rational_to_f64(&self.atomic_mass()) + self.density_mass()
    }

    pub fn atomic_part(&self) -> Measure {
        Measure { tier: self.tier, atoms: self.atoms.clone(), density: Vec::new() }
    }

    /// Replaces every symbol by its assigned value; the result is numeric.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<Measure, MeasureError> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok(Atom { pos: Position::Float(a.pos.evaluate(assignment)?), w: a.w.clone() }))
            .collect::<Result<Vec<_>, MeasureError>>()?;
        Measure::new(Tier::Numeric, atoms, self.density.clone())
    }

    /// Multiplies every weight and level by `c > 0`.
    pub fn scale_mass(&self, c: &Rational) -> Result<Measure, MeasureError> {
        if !c.is_positive() {
            return Err(MeasureError::NonPositiveWeight);
        }
        let cf = rational_to_f64(c);
        Ok(Measure {
            tier: self.tier,
            atoms: self.atoms.iter().map(|a| Atom { pos: a.pos.clone(), w: &a.w * c }).collect(),
            density: self.density.iter().map(|p| Piece { level: p.level * cf, ..*p }).collect(),
        })
    }

    /// Sum of two measures in the same tier.
    pub fn add(&self, other: &Measure) -> Result<Measure, MeasureError> {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut density = self.density.clone();
        density.extend(other.density.iter().copied());
        Measure::new(self.tier, atoms, density)
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson {
            atoms: self.atoms.iter().map(|a| AtomJson { pos: a.pos.canonical(), w: format_rational(&a.w) }).collect(),
            density: self.density.clone(),
            tier: self.tier,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("measure serializes")
    }

    pub fn from_json(j: &MeasureJson) -> Result<Measure, MeasureError> {
        let atoms = j
            .atoms
            .iter()
            .map(|a| Ok(Atom { pos: Position::parse(&a.pos, j.tier)?, w: parse_rational(&a.w)? }))
            .collect::<Result<Vec<_>, MeasureError>>()?;
        Measure::new(j.tier, atoms, j.density.clone())
    }

    pub fn from_json_str(text: &str) -> Result<Measure, MeasureError> {
        let j: MeasureJson = serde_json::from_str(text).map_err(|e| MeasureError::Json(e.to_string()))?;
        Measure::from_json(&j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub pos: String,
    pub w: String,
}

/// Interchange form: `{"atoms":[{"pos","w"}],"density":[{"l","u","level"}],"tier"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    #[serde(default)]
    pub atoms: Vec<AtomJson>,
    #[serde(default)]
    pub density: Vec<Piece>,
    pub tier: Tier,
}

fn normalize_atoms(mut atoms: Vec<Atom>) -> Result<Vec<Atom>, MeasureError> {
    if atoms.iter().any(|a| !a.w.is_positive()) {
        return Err(MeasureError::NonPositiveWeight);
    }
    atoms.sort_by(|a, b| a.pos.sort_cmp(&b.pos));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        if let Some(last) = out.last_mut() {
            if last.pos.coincide(&a.pos) == Coincidence::Same {
                last.w += a.w;
                continue;
            }
        }
        out.push(a);
    }
    check_near_collisions(&out)?;
    Ok(out)
}

fn check_near_collisions(atoms: &[Atom]) -> Result<(), MeasureError> {
    // float atoms are sorted by value, so neighbours suffice
    for pair in atoms.windows(2) {
        if pair[0].pos.coincide(&pair[1].pos) == Coincidence::Near {
            return Err(MeasureError::NearCollision(pair[0].pos.canonical(), pair[1].pos.canonical()));
        }
    }
    Ok(())
}

fn normalize_density(pieces: Vec<Piece>) -> Result<Vec<Piece>, MeasureError> {
    for p in &pieces {
        if !(p.l.is_finite() && p.u.is_finite() && p.level.is_finite()) || p.l > p.u || p.level < 0.0 {
            return Err(MeasureError::BadPiece(p.l, p.u, p.level));
        }
    }
    let pieces: Vec<Piece> = pieces.into_iter().filter(|p| p.u > p.l && p.level > 0.0).collect();
    let mut cuts: Vec<f64> = pieces.iter().flat_map(|p| [p.l, p.u]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out: Vec<Piece> = Vec::new();
    for w in cuts.windows(2) {
        let (l, u) = (w[0], w[1]);
        let level: f64 = pieces.iter().filter(|p| p.l <= l && p.u >= u).map(|p| p.level).sum();
        if level <= 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.u == l && last.level == level => last.u = u,
            _ => out.push(Piece { l, u, level }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rational::rational;

    #[test]
    fn atoms_merge_and_sort() {
        let m = Measure::floats(&[(2.0, rational(1, 2)), (1.0, rational(1, 4)), (2.0, rational(1, 4))]).unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert_eq!(m.atoms()[1].w, rational(3, 4));
        assert!(matches!(
            Measure::floats(&[(1.0, rational(1, 2)), (1.0 + 1e-12, rational(1, 2))]),
            Err(MeasureError::NearCollision(..))
        ));
        assert!(Measure::floats(&[(1.0, rational(0, 1))]).is_err());
    }

    #[test]
    fn density_overlaps_are_summed() {
        let m = Measure::density_only(
            Tier::Numeric,
            vec![Piece { l: 0.0, u: 2.0, level: 1.0 }, Piece { l: 1.0, u: 3.0, level: 1.0 }],
        )
        .unwrap();
        assert_eq!(
            m.density(),
            &[Piece { l: 0.0, u: 1.0, level: 1.0 }, Piece { l: 1.0, u: 2.0, level: 2.0 }, Piece { l: 2.0, u: 3.0, level: 1.0 }]
        );
        assert_eq!(m.total_mass(), 4.0);
        let merged = Measure::density_only(
            Tier::Numeric,
            vec![Piece { l: 0.0, u: 1.0, level: 1.0 }, Piece { l: 1.0, u: 2.0, level: 1.0 }],
        )
        .unwrap();
        assert_eq!(merged.density(), &[Piece { l: 0.0, u: 2.0, level: 1.0 }]);
    }

    #[test]
    fn json_round_trip() {
        let m = Measure::exact(&[("3/10+1/200*tau_1", rational(1, 2)), ("1", rational(1, 2))]).unwrap();
        let text = m.to_json_string();
        assert_eq!(Measure::from_json_str(&text).unwrap(), m);
        assert_eq!(Measure::from_json_str(&text).unwrap().to_json_string(), text);

        let n = Measure::new(
            Tier::Numeric,
            vec![Atom { pos: Position::parse("sqrt(2)", Tier::Numeric).unwrap(), w: rational(1, 3) }],
            vec![Piece { l: 0.0, u: 1.0, level: 0.5 }],
        )
        .unwrap();
        let text = n.to_json_string();
        assert_eq!(
            text,
            r#"{"atoms":[{"pos":"1.4142135623730951","w":"1/3"}],"density":[{"l":0.0,"u":1.0,"level":0.5}],"tier":"numeric"}"#
        );
        assert_eq!(Measure::from_json_str(&text).unwrap(), n);
    }

    #[test]
    fn float_meets_exact() {
        let half = Position::rational(rational(1, 2));
        assert_eq!(half.coincide(&Position::Float(0.5)), Coincidence::Same);
        assert_eq!(half.coincide(&Position::Float(0.5 + 1e-12)), Coincidence::Near);
        let tau = Position::parse("tau", Tier::Symbolic).unwrap();
        assert_eq!(tau.coincide(&Position::Float(0.5)), Coincidence::Apart);
    }
}
