//! Stationary Gaussian processes with a prescribed spectral measure.
//!
//! Paths are synthesized harmonically: every atom `(x, w)` contributes
//! `sqrt(2w) (A cos 2 pi x t + B sin 2 pi x t)` and the density part
//! contributes `M` frequencies drawn from the normalized density, each with
//! weight `m_d / M`. Then `Cov(X_u, X_{u+t})` is the transform of the
//! symmetrized measure at `t`. Density frequencies make the marginals a
//! Gaussian scale mixture whose distance from normal shrinks like `1/M`.
//!
//! Randomness is ChaCha20 keyed by the process seed, with one stream per path,
//! so paths are reproducible regardless of scheduling.

mod export;
mod stats;

pub use export::{read_binary, write_binary, write_csv, BinaryHeader};
pub use stats::{
    empirical_autocovariance, empirical_autocovariance_at, gaussianity_test, rigidity_check, spectral_estimate,
    strongest_peaks, CovarianceReport, GaussianityReport, RigidityReport, SpectralPoint, TimeTest,
};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::TAU;

use crate::numkit::rational::rational_to_f64;
use crate::specmeasure::{bochner, symmetrize, Measure, MeasureError, Piece, Position};

pub const DEFAULT_DENSITY_FREQUENCIES: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("spectral measure has zero mass")]
    ZeroMass,
    #[error("grid step must be positive")]
    BadStep,
    #[error("need at least one path and one grid point")]
    EmptySample,
    #[error("scale must be positive")]
    BadScale,
    #[error("lag {0} is not a multiple of the grid step within the grid")]
    OffGridLag(f64),
    #[error("span {span} is shorter than the {required} needed to resolve the atoms")]
    InsufficientSpan { span: f64, required: f64 },
    #[error("need at least {needed} paths, got {got}")]
    TooFewPaths { needed: usize, got: usize },
    #[error("{0}")]
    Io(String),
    #[error("malformed binary sample: {0}")]
    Format(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t0: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid {
    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.t0 + k as f64 * self.step).collect()
    }

    pub fn span(&self) -> f64 {
        self.count as f64 * self.step
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessSpec {
    pub spectral: Measure,
    pub grid: Grid,
    pub paths: usize,
    pub seed: u64,
    pub density_frequencies: usize,
}

impl ProcessSpec {
    pub fn new(spectral: Measure, grid: Grid, paths: usize, seed: u64) -> Self {
        Self { spectral, grid, paths, seed, density_frequencies: DEFAULT_DENSITY_FREQUENCIES }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.grid.step > 0.0 && self.grid.step.is_finite()) {
            return Err(FlowError::BadStep);
        }
        if self.paths == 0 || self.grid.count == 0 {
            return Err(FlowError::EmptySample);
        }
        if !(self.spectral.total_mass() > 0.0) {
            return Err(FlowError::ZeroMass);
        }
        Ok(())
    }

    /// `Var(X_t)`, twice the spectral mass.
    pub fn variance(&self) -> f64 {
        2.0 * self.spectral.total_mass()
    }

    /// SHA-256 of the measure's canonical JSON.
    pub fn measure_hash(&self) -> [u8; 32] {
        Sha256::digest(self.spectral.to_json_string().as_bytes()).into()
    }
}

/// Frequency of one atom; rational positions `p/q` keep their exact form so
/// that periods reduce exactly.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Freq {
    Ratio(f64, f64),
    Real(f64),
}

impl Freq {
    fn of(pos: &Position) -> Result<Self, MeasureError> {
        if let Position::Exact(s) = pos {
            if let Some(r) = s.as_rational() {
                if let (Some(p), Some(q)) = (r.numer().to_i64(), r.denom().to_i64()) {
                    if p.unsigned_abs() < 1 << 53 && q < 1 << 53 {
                        return Ok(Freq::Ratio(p as f64, q as f64));
                    }
                }
            }
        }
        Ok(Freq::Real(pos.to_f64()?))
    }

    /// `x t mod 1`.
    #[inline]
    pub(crate) fn turns(self, t: f64) -> f64 {
        match self {
            Freq::Ratio(p, q) => (p * t).rem_euclid(q) / q,
            Freq::Real(x) => (x * t).rem_euclid(1.0),
        }
    }
}

pub(crate) struct Synth {
    pub(crate) atoms: Vec<(Freq, f64)>,
    density: Vec<Piece>,
    density_mass: f64,
    m: usize,
}

impl Synth {
    pub(crate) fn new(spec: &ProcessSpec) -> Result<Self, FlowError> {
        spec.validate()?;
        let atoms = spec
            .spectral
            .atoms()
            .iter()
            .map(|a| Ok((Freq::of(&a.pos)?, rational_to_f64(&a.w))))
            .collect::<Result<Vec<_>, MeasureError>>()?;
        let density = spec.spectral.density().to_vec();
        let density_mass = spec.spectral.density_mass();
        let m = if density.is_empty() { 0 } else { spec.density_frequencies.max(1) };
        Ok(Self { atoms, density, density_mass, m })
    }

    fn sample_density_freq(&self, rng: &mut ChaCha20Rng) -> f64 {
        let mut r = rng.gen::<f64>() * self.density_mass;
        for p in &self.density {
            let mass = p.mass();
            if r < mass || std::ptr::eq(p, self.density.last().expect("nonempty")) {
                return p.l + rng.gen::<f64>() * (p.u - p.l);
            }
            r -= mass;
        }
        unreachable!()
    }

    /// `(frequency, amplitude, A, B)` for one path.
    fn coefficients(&self, seed: u64, path: usize) -> Vec<(Freq, f64, f64, f64)> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(path as u64);
        let mut out = Vec::with_capacity(self.atoms.len() + self.m);
        for &(f, w) in &self.atoms {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            out.push((f, (2.0 * w).sqrt(), a, b));
        }
        let amp = (2.0 * self.density_mass / self.m.max(1) as f64).sqrt();
        for _ in 0..self.m {
            let x = self.sample_density_freq(&mut rng);
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            out.push((Freq::Real(x), amp, a, b));
        }
        out
    }

    pub(crate) fn path_at(&self, seed: u64, path: usize, times: &[f64]) -> Vec<f64> {
        let coef = self.coefficients(seed, path);
        times
            .iter()
            .map(|&t| {
                coef.iter()
                    .map(|&(f, amp, a, b)| {
                        let th = TAU * f.turns(t);
                        amp * (a * th.cos() + b * th.sin())
                    })
                    .sum()
            })
            .collect()
    }

    /// `Cov(X_0, X_t)` in closed form.
    pub(crate) fn covariance(&self, spectral: &Measure, t: f64) -> Result<f64, FlowError> {
        let atomic: f64 = self.atoms.iter().map(|&(f, w)| 2.0 * w * (TAU * f.turns(t)).cos()).sum();
        let dens = if self.density.is_empty() {
            0.0
        } else {
            let d = Measure::density_only(spectral.tier(), self.density.clone())?;
            bochner(&symmetrize(&d)?, t)?.re
        };
        Ok(atomic + dens)
    }
}

/// Paths on the grid, possibly observed at rescaled times `scale * t`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    /// `values[path][k]` is `X_{scale * times[k]}`.
    pub values: Vec<Vec<f64>>,
    pub spec: ProcessSpec,
    pub scale: f64,
}

impl PathSample {
    pub fn paths(&self) -> usize {
        self.values.len()
    }

    /// Regenerates path values at arbitrary observation times.
    pub(crate) fn regenerate(&self, times: &[f64]) -> Result<Vec<Vec<f64>>, FlowError> {
        let synth = Synth::new(&self.spec)?;
        let scaled: Vec<f64> = times.iter().map(|&t| self.scale * t).collect();
        Ok((0..self.spec.paths).into_par_iter().map(|p| synth.path_at(self.spec.seed, p, &scaled)).collect())
    }

    /// `Cov(X_0, X_t)` of the observed process.
    pub fn theoretical_covariance(&self, t: f64) -> Result<f64, FlowError> {
        Synth::new(&self.spec)?.covariance(&self.spec.spectral, self.scale * t)
    }
}

pub fn simulate(spec: &ProcessSpec) -> Result<PathSample, FlowError> {
    simulate_scaled(spec, 1.0)
}

fn simulate_scaled(spec: &ProcessSpec, scale: f64) -> Result<PathSample, FlowError> {
    let synth = Synth::new(spec)?;
    let times = spec.grid.times();
    let scaled: Vec<f64> = times.iter().map(|&t| scale * t).collect();
    let values = (0..spec.paths).into_par_iter().map(|p| synth.path_at(spec.seed, p, &scaled)).collect();
    Ok(PathSample { times, values, spec: spec.clone(), scale })
}

/// The process `X_{s t}`, regenerated from the seed rather than interpolated.
/// Its spectral measure is the image of the original under `x -> s x`.
pub fn rescale_paths(sample: &PathSample, s: f64) -> Result<PathSample, FlowError> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(FlowError::BadScale);
    }
    if s == 1.0 {
        return Ok(sample.clone());
    }
    simulate_scaled(&sample.spec, sample.scale * s)
}
