use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{scale_measure, Atom, Coincidence, Measure, MeasureError, Position};
use crate::numkit::rational::format_rational;
use crate::numkit::{NumericReal, Rational, Real, SymbolicReal, Tier};
use crate::qindep::{expand_group, GroupSlice};

/// `sum_h a_h nu_h` over the word ball of radius `radius` in the group
/// generated by `generators`, with `a_h` proportional to
/// `lambda^{|word(h)|}`.
#[derive(Clone, Debug)]
pub struct GroupMeasure {
    pub generators: Vec<Real>,
    pub base: Measure,
    pub lambda: Rational,
    pub radius: u32,
}

impl GroupMeasure {
    pub fn slice(&self) -> Result<GroupSlice, MeasureError> {
        if self.generators.is_empty() {
            return Ok(GroupSlice::trivial(self.base.tier()));
        }
        Ok(expand_group(&self.generators, self.radius)?)
    }
}

fn scale_position(x: &Position, h: &Position) -> Position {
    match (x, h) {
        (Position::Exact(a), Position::Exact(b)) => Position::Exact(a * b),
        (Position::Float(a), Position::Float(b)) => Position::Float(a * b),
        _ => unreachable!("converted to the base tier"),
    }
}

/// The truncated group measure as a plain atomic measure, with the weights
/// `a_h` renormalized to sum to 1 over the truncation.
pub fn realize(gm: &GroupMeasure) -> Result<Measure, MeasureError> {
    if !(gm.lambda.is_positive() && gm.lambda < Rational::one()) {
        return Err(MeasureError::BadDecay(format_rational(&gm.lambda)));
    }
    if !gm.base.is_atomic() {
        return Err(MeasureError::NotAtomic);
    }
    let slice = gm.slice()?;
    let tier = gm.base.tier();
    let raw: Vec<Rational> = slice.elements.iter().map(|e| num_traits::pow(gm.lambda.clone(), e.length() as usize)).collect();
    let z: Rational = raw.iter().sum();

    let mut atoms: Vec<(Atom, String)> = Vec::new();
    for (e, r) in slice.elements.iter().zip(&raw) {
        let h = Position::from_real(&e.value, tier)?;
        let a_h = r / &z;
        for (i, b) in gm.base.atoms().iter().enumerate() {
            let label = format!("{:?}*atom{}", e.word, i);
            atoms.push((Atom { pos: scale_position(&b.pos, &h), w: &a_h * &b.w }, label));
        }
    }
    let mut collisions = Vec::new();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            if atoms[i].0.pos.coincide(&atoms[j].0.pos) != Coincidence::Apart {
                collisions.push(format!("{} ~ {}", atoms[i].1, atoms[j].1));
            }
        }
    }
    if !collisions.is_empty() {
        return Err(MeasureError::GroupCollision(collisions));
    }
    Measure::new(tier, atoms.into_iter().map(|(a, _)| a).collect(), Vec::new())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum StructuralVerdict {
    /// `sign * s` is the group element with this word.
    MemberOfH { word: Vec<i32>, sign: i8 },
    /// Atoms of `sigma_s` that coincide with atoms of `sigma` at this radius.
    CollisionCount { radius: u32, count: usize },
}

fn same_value(s: &Real, h: &Real) -> bool {
    match (s, h) {
        (Real::Symbolic(a), Real::Symbolic(b)) => a == b,
        (Real::Numeric(a), Real::Numeric(b)) => {
            let p = a.precision().min(b.precision());
            let tol = a.abs().mul(&NumericReal::from_i64(2, p).and_then(|two| two.powi(-((p / 2) as i32))).expect("finite"));
            a.sub(b).abs().cmp_value(&tol).is_le()
        }
        (Real::Numeric(a), Real::Symbolic(b)) | (Real::Symbolic(b), Real::Numeric(a)) => {
            b.as_rational().is_some_and(|r| a.to_rational().as_ref() == Some(r))
        }
    }
}

fn negate(s: &Real) -> Real {
    match s {
        Real::Symbolic(x) => Real::Symbolic(-x),
        Real::Numeric(x) => Real::Numeric(x.neg()),
    }
}

/// Whether scaling by `s` permutes the group index set (`s` or `-s` lies in
/// the truncation), and otherwise how many atoms of the realized truncation
/// survive scaling by `s`.
///
/// A numeric `s` applied to a symbolic measure is lifted to the rational it
/// represents exactly.
pub fn structural_self_similarity(gm: &GroupMeasure, s: &Real) -> Result<StructuralVerdict, MeasureError> {
    if s.is_zero() {
        return Err(MeasureError::ZeroScale);
    }
    let slice = gm.slice()?;
    let minus = negate(s);
    for e in &slice.elements {
        if same_value(s, &e.value) {
            return Ok(StructuralVerdict::MemberOfH { word: e.word.clone(), sign: 1 });
        }
        if same_value(&minus, &e.value) {
            return Ok(StructuralVerdict::MemberOfH { word: e.word.clone(), sign: -1 });
        }
    }
    let sigma = realize(gm)?;
    let s = match (sigma.tier(), s) {
        (Tier::Symbolic, Real::Numeric(x)) => {
            Real::Symbolic(SymbolicReal::from_rational(x.to_rational().unwrap_or_else(Rational::zero)))
        }
        _ => s.clone(),
    };
    let scaled = scale_measure(&sigma, &s)?;
    let count = scaled
        .atoms()
        .iter()
        .filter(|a| sigma.atoms().iter().any(|b| a.pos.coincide(&b.pos) != Coincidence::Apart))
        .count();
    Ok(StructuralVerdict::CollisionCount { radius: gm.radius, count })
}
