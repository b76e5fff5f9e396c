//! Finite Kronecker sets and the approximation problem
//! `exp(2 pi i t x_j) ~ exp(2 pi i phase_j)`.
//!
//! Residuals are chord distances on the unit circle. Every reported residual
//! is computed from the exact binary values of `t` and of the points, so a
//! witness can be re-checked at any higher precision.

mod build;
mod solve;
mod weak;

pub use build::{build_kronecker_points, korner_points, BuildConfig, Certificate, KornerPoints, KroneckerSetSpec};
pub use solve::{
    recheck_residuals, rigidity_witness, solve_kronecker_approx, verify_kronecker_property, Approximation, KroneckerReport, Method,
    SolveOptions, TrialFailure,
};
pub use weak::{weak_convergence_check, Convergence, WeakReport, WeakSeries, WeakTarget};

use num_complex::Complex64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::numkit::circle::phase_chord;
use crate::numkit::rational::{rational_from_f64, rational_to_f64};
use crate::numkit::{NumericReal, NumkitError, Rational};
use crate::qindep::QindepError;
use crate::specmeasure::MeasureError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KroneckerError {
    #[error(transparent)]
    Numkit(#[from] NumkitError),
    #[error(transparent)]
    Qindep(#[from] QindepError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("{0} points but {1} phases")]
    LengthMismatch(usize, usize),
    #[error("no points")]
    Empty,
    #[error("point {0} is zero")]
    ZeroPoint(usize),
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("phase {0} is outside [0, 1)")]
    BadPhase(f64),
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("delta must be positive")]
    BadDelta,
    #[error("target {0} is zero")]
    ZeroTarget(usize),
    #[error("the group slice is dependent: {0:?}")]
    DependentSlice(Vec<String>),
    #[error("no accepted sample after {rounds} rounds; relations seen: {relations:?}")]
    RetryBudget { rounds: usize, relations: Vec<Vec<String>> },
    #[error("measure has no atoms")]
    NoAtoms,
    #[error("times must be increasing")]
    TimesNotIncreasing,
    #[error("target modulus exceeds 1")]
    TargetTooLarge,
}

/// Target values `exp(2 pi i phase_j)` at the points `x_j`.
#[derive(Clone, Debug)]
pub struct UnimodularTarget {
    pub points: Vec<NumericReal>,
    pub phases: Vec<f64>,
}

impl UnimodularTarget {
    pub fn new(points: Vec<NumericReal>, phases: Vec<f64>) -> Result<Self, KroneckerError> {
        if points.len() != phases.len() {
            return Err(KroneckerError::LengthMismatch(points.len(), phases.len()));
        }
        if points.is_empty() {
            return Err(KroneckerError::Empty);
        }
        for (i, x) in points.iter().enumerate() {
            if x.is_zero() {
                return Err(KroneckerError::ZeroPoint(i));
            }
            if let Some(j) = points[..i].iter().position(|y| y == x) {
                return Err(KroneckerError::DuplicatePoint(j, i));
            }
        }
        if let Some(p) = phases.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(KroneckerError::BadPhase(*p));
        }
        Ok(Self { points, phases })
    }

    /// All phases zero.
    pub fn dirichlet(points: Vec<NumericReal>) -> Result<Self, KroneckerError> {
        let n = points.len();
        Self::new(points, vec![0.0; n])
    }

    pub fn from_f64(points: &[f64], phases: &[f64]) -> Result<Self, KroneckerError> {
        let pts = points
            .iter()
            .map(|&x| NumericReal::from_f64(x, crate::numkit::DEFAULT_PRECISION))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(pts, phases.to_vec())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points_f64(&self) -> Vec<f64> {
        self.points.iter().map(NumericReal::to_f64).collect()
    }

    pub fn targets(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&p| crate::numkit::circle::unit(p)).collect()
    }
}

/// A time `t` with the residuals `|exp(2 pi i t x_j) - exp(2 pi i phase_j)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxWitness {
    pub t: f64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub method: Method,
    /// Largest time examined by the search.
    pub search_bound: f64,
}

impl ApproxWitness {
    pub(crate) fn at(t: f64, target: &UnimodularTarget, method: Method, search_bound: f64) -> Self {
        let residuals = exact_residuals(t, target);
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Self { t, residuals, max_residual, method, search_bound }
    }
}

/// Chord residual for one point, from the exact binary values of `t`, `x`
/// and the phase.
pub fn exact_residual(t: f64, x: &NumericReal, phase: f64) -> f64 {
    let (Some(tr), Some(xr), Some(pr)) = (rational_from_f64(t), x.to_rational(), rational_from_f64(phase)) else {
        return f64::NAN;
    };
    let d: Rational = tr * xr - pr;
    let frac = &d - Rational::from_integer(d.floor().to_integer());
    let f = rational_to_f64(&frac.abs());
    phase_chord(f, 0.0)
}

pub fn exact_residuals(t: f64, target: &UnimodularTarget) -> Vec<f64> {
    target.points.iter().zip(&target.phases).map(|(x, &p)| exact_residual(t, x, p)).collect()
}

/// Fast `f64` residual used while searching.
#[inline]
pub fn fast_residual(t: f64, x: f64, phase: f64) -> f64 {
    phase_chord(t * x, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::expr::eval_expr;

    #[test]
    fn exact_residuals_match_closed_forms() {
        let r2 = eval_expr("sqrt(2)", 128).unwrap();
        let got = exact_residual(29.0, &r2, 0.0);
        assert!((got - 0.0765940834977013777).abs() < 1e-15, "{got}");
        let got = exact_residual(6.0, &r2, 0.5);
        assert!((got - 0.09244690097856419259).abs() < 1e-15, "{got}");
    }

    #[test]
    fn target_validation() {
        assert!(UnimodularTarget::from_f64(&[1.0], &[0.0, 0.5]).is_err());
        assert!(UnimodularTarget::from_f64(&[0.0], &[0.0]).is_err());
        assert!(UnimodularTarget::from_f64(&[1.0, 1.0], &[0.0, 0.5]).is_err());
        assert!(UnimodularTarget::from_f64(&[1.0], &[1.0]).is_err());
        assert!(UnimodularTarget::from_f64(&[], &[]).is_err());
    }
}
