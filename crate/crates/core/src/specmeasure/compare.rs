use num_traits::Zero;
use serde::Serialize;

use super::{Coincidence, Measure, MeasureError, Piece, Position};
use crate::numkit::{Rational, SymbolicReal};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommonMass {
    /// Positions carrying atoms of both measures.
    pub atoms: Vec<String>,
    /// Intervals where both densities are positive.
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SingularityVerdict {
    Singular,
    CommonMass(CommonMass),
    /// Numeric atoms within tolerance of each other, not confirmed equal.
    Inconclusive { pairs: Vec<(String, String)> },
}

impl SingularityVerdict {
    pub fn is_singular(&self) -> bool {
        matches!(self, SingularityVerdict::Singular)
    }
}

/// Decides mutual singularity for atomic plus piecewise-density measures.
/// Atoms never meet density mass, so only atom/atom and density/density
/// overlaps can be shared.
pub fn singularity_test(sigma: &Measure, eta: &Measure) -> SingularityVerdict {
    let mut common = CommonMass { atoms: Vec::new(), intervals: Vec::new() };
    let mut near = Vec::new();
    for a in sigma.atoms() {
        for b in eta.atoms() {
            match a.pos.coincide(&b.pos) {
                Coincidence::Same => common.atoms.push(a.pos.canonical()),
                Coincidence::Near => near.push((a.pos.canonical(), b.pos.canonical())),
                Coincidence::Apart => {}
            }
        }
    }
    for p in sigma.density() {
        for q in eta.density() {
            let (l, u) = (p.l.max(q.l), p.u.min(q.u));
            if u > l {
                common.intervals.push((l, u));
            }
        }
    }
    if !common.atoms.is_empty() || !common.intervals.is_empty() {
        SingularityVerdict::CommonMass(common)
    } else if !near.is_empty() {
        SingularityVerdict::Inconclusive { pairs: near }
    } else {
        SingularityVerdict::Singular
    }
}

fn covered(piece: &Piece, by: &[Piece]) -> bool {
    let mut cursor = piece.l;
    for q in by {
        if q.l <= cursor && q.u > cursor {
            cursor = q.u;
        }
        if cursor >= piece.u {
            return true;
        }
    }
    cursor >= piece.u
}

/// `sigma << eta`: every atom of `sigma` is an atom of `eta` (numeric
/// positions up to the collision tolerance) and the positive-density region
/// of `sigma` lies inside that of `eta`.
pub fn abs_continuity_test(sigma: &Measure, eta: &Measure) -> bool {
    let atoms_ok = sigma
        .atoms()
        .iter()
        .all(|a| eta.atoms().iter().any(|b| a.pos.coincide(&b.pos) != Coincidence::Apart));
    atoms_ok && sigma.density().iter().all(|p| covered(p, eta.density()))
}

pub fn equivalence_test(sigma: &Measure, eta: &Measure) -> bool {
    abs_continuity_test(sigma, eta) && abs_continuity_test(eta, sigma)
}

fn exact_ratio(a: &SymbolicReal, b: &SymbolicReal) -> Option<SymbolicReal> {
    if let Some(s) = a.checked_div(b) {
        return Some(s);
    }
    // a = c b for a rational c
    let (ca, cb) = (a.coordinates(), b.coordinates());
    if ca.len() != cb.len() || !ca.keys().eq(cb.keys()) {
        return None;
    }
    let (m, bc) = cb.iter().next()?;
    let c = &ca[m] / bc;
    cb.iter().all(|(m, v)| ca[m] == v * &c).then(|| SymbolicReal::from_rational(c))
}

fn ratio(a: &Position, b: &Position) -> Option<Position> {
    match (a, b) {
        (Position::Exact(x), Position::Exact(y)) => exact_ratio(x, y).map(Position::Exact),
        (Position::Float(x), Position::Float(y)) => Some(Position::Float(x / y)),
        _ => None,
    }
}

fn times(a: &Position, s: &Position) -> Position {
    match (a, s) {
        (Position::Exact(x), Position::Exact(y)) => Position::Exact(x * y),
        (Position::Float(x), Position::Float(y)) => Position::Float(x * y),
        _ => unreachable!("same tier"),
    }
}

fn atoms_only(sigma: &Measure) -> Result<Vec<Position>, MeasureError> {
    if !sigma.is_atomic() {
        return Err(MeasureError::NotAtomic);
    }
    if sigma.atoms().is_empty() {
        return Err(MeasureError::NoAtoms);
    }
    if sigma.atoms().iter().any(|a| a.pos.is_zero()) {
        return Err(MeasureError::AtomAtZero);
    }
    Ok(sigma.atoms().iter().map(|a| a.pos.clone()).collect())
}

/// All `s` with `sigma_s` equivalent to `sigma`, i.e. `s * support = support`.
/// Any such `s` maps the first atom onto some atom, so the ratios
/// `x_j / x_0` are the only candidates.
pub fn self_similarity_scales(sigma: &Measure) -> Result<Vec<Position>, MeasureError> {
    let support = atoms_only(sigma)?;
    let mut out: Vec<Position> = Vec::new();
    for xj in &support {
        let Some(s) = ratio(xj, &support[0]) else {
            continue;
        };
        let maps_onto = support.iter().all(|x| {
            let y = times(x, &s);
            support.iter().any(|z| y.coincide(z) != Coincidence::Apart)
        });
        if maps_onto {
            out.push(s);
        }
    }
    out.sort_by(|a, b| a.sort_cmp(b));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapReport {
    pub overlapping: usize,
    pub total: usize,
    #[serde(serialize_with = "crate::serde_util::rational_str")]
    pub fraction: Rational,
}

/// How many atoms `x` of `sigma` have `s x` within tolerance of an atom.
pub fn overlap_fraction(sigma: &Measure, s: f64) -> Result<OverlapReport, MeasureError> {
    let n = sigma.atoms().len();
    let mut hits = 0;
    for a in sigma.atoms() {
        let y = Position::Float(s * a.pos.to_f64()?);
        let mut found = false;
        for b in sigma.atoms() {
            if y.coincide(&Position::Float(b.pos.to_f64()?)) != Coincidence::Apart {
                found = true;
                break;
            }
        }
        hits += usize::from(found);
    }
    let fraction = if n == 0 { Rational::zero() } else { Rational::new((hits as i64).into(), (n as i64).into()) };
    Ok(OverlapReport { overlapping: hits, total: n, fraction })
}
