use num_complex::Complex64;
use num_traits::{One, Signed};
use std::f64::consts::PI;

use super::{Atom, Measure, MeasureError, Piece, Position};
use crate::numkit::circle::unit;
use crate::numkit::rational::{rational_from_f64, rational_to_f64};
use crate::numkit::{NumkitError, Rational, Real, SymbolicReal};

fn mul_pos(p: &Position, s: &Position) -> Position {
    match (p, s) {
        (Position::Exact(a), Position::Exact(b)) => Position::Exact(a * b),
        (Position::Float(a), Position::Float(b)) => Position::Float(a * b),
        _ => unreachable!("scalar was converted to the measure's tier"),
    }
}

fn add_pos(p: &Position, r: &Position) -> Position {
    match (p, r) {
        (Position::Exact(a), Position::Exact(b)) => Position::Exact(a + b),
        (Position::Float(a), Position::Float(b)) => Position::Float(a + b),
        _ => unreachable!("scalar was converted to the measure's tier"),
    }
}

/// The image of `sigma` under `x -> s x`.
pub fn scale_measure(sigma: &Measure, s: &Real) -> Result<Measure, MeasureError> {
    if s.is_zero() {
        return Err(MeasureError::ZeroScale);
    }
    let sp = Position::from_real(s, sigma.tier())?;
    let atoms = sigma.atoms().iter().map(|a| Atom { pos: mul_pos(&a.pos, &sp), w: a.w.clone() }).collect();
    let density = if sigma.density().is_empty() {
        Vec::new()
    } else {
        let sf = sp.to_f64()?;
        sigma
            .density()
            .iter()
            .map(|p| {
                let (a, b) = (sf * p.l, sf * p.u);
                Piece { l: a.min(b), u: a.max(b), level: p.level / sf.abs() }
            })
            .collect()
    };
    Measure::new(sigma.tier(), atoms, density)
}

/// The image of `sigma` under `x -> x + r`.
pub fn translate_measure(sigma: &Measure, r: &Real) -> Result<Measure, MeasureError> {
    let rp = Position::from_real(r, sigma.tier())?;
    let atoms = sigma.atoms().iter().map(|a| Atom { pos: add_pos(&a.pos, &rp), w: a.w.clone() }).collect();
    let density = if sigma.density().is_empty() {
        Vec::new()
    } else {
        let rf = rp.to_f64()?;
        sigma.density().iter().map(|p| Piece { l: p.l + rf, u: p.u + rf, level: p.level }).collect()
    };
    Measure::new(sigma.tier(), atoms, density)
}

/// `sigma` plus its reflection through 0. An atom at 0 doubles.
pub fn symmetrize(sigma: &Measure) -> Result<Measure, MeasureError> {
    let minus_one = Real::Symbolic(SymbolicReal::from_rational(-Rational::one()));
    sigma.add(&scale_measure(sigma, &minus_one)?)
}

/// `sum a_h sigma_h` for positive weights summing to 1.
pub fn mix(measures: &[Measure], weights: &[Rational]) -> Result<Measure, MeasureError> {
    if measures.len() != weights.len() {
        return Err(MeasureError::LengthMismatch(measures.len(), weights.len()));
    }
    let first = measures.first().ok_or(MeasureError::EmptyMixture)?;
    if weights.iter().any(|w| !w.is_positive()) {
        return Err(MeasureError::NonPositiveMixtureWeight);
    }
    let total: Rational = weights.iter().sum();
    let off = rational_to_f64(&(total - Rational::one()));
    if off.abs() > 1e-12 {
        return Err(MeasureError::WeightSum(1.0 + off));
    }
    let mut acc = Measure::zero(first.tier());
    for (m, w) in measures.iter().zip(weights) {
        if m.tier() != first.tier() {
            return Err(MeasureError::TierMismatch("a mixture component".into(), first.tier()));
        }
        acc = acc.add(&m.scale_mass(w)?)?;
    }
    Ok(acc)
}

fn inside(p: &Position, a: f64, b: f64) -> Result<bool, MeasureError> {
    match p {
        Position::Float(x) => Ok(a <= *x && *x <= b),
        Position::Exact(s) => {
            let r = s.as_rational().ok_or_else(|| {
                NumkitError::UnassignedSymbol(s.symbols().next().unwrap_or_default().to_string())
            })?;
            let lo = rational_from_f64(a).ok_or(NumkitError::NonFinite)?;
            let hi = rational_from_f64(b).ok_or(NumkitError::NonFinite)?;
            Ok(&lo <= r && r <= &hi)
        }
    }
}

/// The conditional measure `nu(. | [a, b])`.
pub fn restrict(nu: &Measure, a: f64, b: f64) -> Result<Measure, MeasureError> {
    let mut atoms = Vec::new();
    for at in nu.atoms() {
        if inside(&at.pos, a, b)? {
            atoms.push(at.clone());
        }
    }
    let pieces: Vec<Piece> = nu
        .density()
        .iter()
        .filter_map(|p| {
            let (l, u) = (p.l.max(a), p.u.min(b));
            (u > l).then_some(Piece { l, u, level: p.level })
        })
        .collect();
    let atomic: Rational = atoms.iter().map(|x: &Atom| &x.w).sum();
    let dens: f64 = pieces.iter().map(Piece::mass).sum();
    let mass = atomic + rational_from_f64(dens).ok_or(NumkitError::NonFinite)?;
    if !mass.is_positive() {
        return Err(MeasureError::ZeroMassInterval(a, b));
    }
    let mf = rational_to_f64(&mass);
    let atoms = atoms.into_iter().map(|x| Atom { pos: x.pos, w: x.w / &mass }).collect();
    let pieces = pieces.into_iter().map(|p| Piece { level: p.level / mf, ..p }).collect();
    Measure::new(nu.tier(), atoms, pieces)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `int exp(2 pi i t x) dsigma(x)` in closed form.
pub fn bochner(sigma: &Measure, t: f64) -> Result<Complex64, MeasureError> {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in sigma.atoms() {
        acc += rational_to_f64(&a.w) * unit(t * a.pos.to_f64()?);
    }
    for p in sigma.density() {
        let width = p.u - p.l;
        acc += p.level * width * sinc(PI * t * width) * unit(t * (p.u + p.l) / 2.0);
    }
    Ok(acc)
}
