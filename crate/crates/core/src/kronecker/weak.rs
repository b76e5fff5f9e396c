use num_complex::Complex64;
use serde::Serialize;

use super::KroneckerError;
use crate::numkit::circle::unit;
use crate::specmeasure::{bochner, Measure};

/// A bounded target function for weak convergence of characters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeakTarget {
    Constant(Complex64),
    /// `exp(2 pi i u x)`.
    Character(f64),
    /// `c1 + c2 exp(2 pi i u x)`.
    Affine { c1: Complex64, c2: Complex64, u: f64 },
}

impl WeakTarget {
    pub fn modulus_bound(&self) -> f64 {
        match self {
            WeakTarget::Constant(c) => c.norm(),
            WeakTarget::Character(_) => 1.0,
            WeakTarget::Affine { c1, c2, .. } => c1.norm() + c2.norm(),
        }
    }

    pub fn value(&self, x: f64) -> Complex64 {
        match *self {
            WeakTarget::Constant(c) => c,
            WeakTarget::Character(u) => unit(u * x),
            WeakTarget::Affine { c1, c2, u } => c1 + c2 * unit(u * x),
        }
    }

    /// `<g, xi_v>` in `L^2(mu)`.
    fn pair_character(&self, mu: &Measure, v: f64) -> Result<Complex64, KroneckerError> {
        Ok(match *self {
            WeakTarget::Constant(c) => c * bochner(mu, -v)?,
            WeakTarget::Character(u) => bochner(mu, u - v)?,
            WeakTarget::Affine { c1, c2, u } => c1 * bochner(mu, -v)? + c2 * bochner(mu, u - v)?,
        })
    }

    fn describe(&self) -> String {
        match self {
            WeakTarget::Constant(c) => format!("constant {c}"),
            WeakTarget::Character(u) => format!("character {u}"),
            WeakTarget::Affine { c1, c2, u } => format!("affine {c1} + {c2} xi_{u}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Convergence {
    /// Every defect in the tail half of the times is below `tol`.
    BelowTolerance,
    AboveTolerance,
    /// Some atom forces a defect of at least `lower_bound` for every `t`.
    CannotConverge { lower_bound: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakSeries {
    pub scale: f64,
    pub target: String,
    /// Sup over test frequencies, one entry per time.
    pub defects: Vec<f64>,
    /// Least-squares `C` in `defect ~ C / t` over the tail half of the times.
    pub fitted_c: f64,
    pub status: Convergence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakReport {
    pub tol: f64,
    pub series: Vec<WeakSeries>,
}

impl WeakReport {
    pub fn all_below(&self) -> bool {
        self.series.iter().all(|s| s.status == Convergence::BelowTolerance)
    }
}

/// Tests `xi_{s_j t} -> g_j` weakly in `L^2(mu)` against the characters
/// `xi_u`, `u` in `test_freqs`: the defect at `t` is
/// `sup_u |mu^(s_j t - u) - <g_j, xi_u>|`. On an atom `x` the normalized
/// indicator pairing equals `exp(2 pi i s t x) - g(x)`, so `1 - |g(x)|`
/// bounds the defect from below whatever `t` is.
pub fn weak_convergence_check(
    mu: &Measure,
    scales: &[f64],
    targets: &[WeakTarget],
    ts: &[f64],
    test_freqs: &[f64],
    tol: f64,
) -> Result<WeakReport, KroneckerError> {
    if scales.len() != targets.len() {
        return Err(KroneckerError::LengthMismatch(scales.len(), targets.len()));
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(KroneckerError::TimesNotIncreasing);
    }
    if targets.iter().any(|g| g.modulus_bound() > 1.0 + 1e-12) {
        return Err(KroneckerError::TargetTooLarge);
    }
    let atoms: Vec<f64> = mu.atoms().iter().map(|a| a.pos.to_f64()).collect::<Result<_, _>>()?;
    let mut series = Vec::with_capacity(scales.len());
    for (&s, g) in scales.iter().zip(targets) {
        let g_pairs: Vec<Complex64> =
            test_freqs.iter().map(|&u| g.pair_character(mu, u)).collect::<Result<_, _>>()?;
        let mut defects = Vec::with_capacity(ts.len());
        for &t in ts {
            let mut sup = 0.0f64;
            for (&u, gp) in test_freqs.iter().zip(&g_pairs) {
                sup = sup.max((bochner(mu, s * t - u)? - gp).norm());
            }
            defects.push(sup);
        }
        let half = defects.len() / 2;
        let (num, den) = ts[half..]
            .iter()
            .zip(&defects[half..])
            .fold((0.0, 0.0), |(n, d), (&t, &e)| (n + e / t, d + 1.0 / (t * t)));
        let fitted_c = if den > 0.0 { num / den } else { 0.0 };
        let lower_bound = atoms.iter().map(|&x| 1.0 - g.value(x).norm()).fold(0.0, f64::max);
        let tail = &defects[half..];
        let status = if lower_bound > tol {
            Convergence::CannotConverge { lower_bound }
        } else if tail.iter().all(|&d| d < tol) {
            Convergence::BelowTolerance
        } else {
            Convergence::AboveTolerance
        };
        series.push(WeakSeries { scale: s, target: g.describe(), defects, fitted_c, status });
    }
    Ok(WeakReport { tol, series })
}
