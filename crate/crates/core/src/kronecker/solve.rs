use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::{exact_residuals, fast_residual, ApproxWitness, KroneckerError, UnimodularTarget};
use crate::numkit::lll::{default_delta, lll_reduce};
use crate::numkit::rational::{rational_from_f64, round_to_integer};
use crate::numkit::{NumericReal, Rational};
use crate::specmeasure::{Measure, MeasureError, Position};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Grid,
    #[default]
    Lattice,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid" => Ok(Method::Grid),
            "lattice" => Ok(Method::Lattice),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: Method,
    /// Grid evaluations allowed.
    pub grid_evaluations: u64,
    /// Nearest-plane roundings allowed.
    pub lattice_attempts: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { method: Method::Lattice, grid_evaluations: 100_000_000, lattice_attempts: 10_000 }
    }
}

impl SolveOptions {
    pub fn grid() -> Self {
        Self { method: Method::Grid, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Approximation {
    Found(ApproxWitness),
    NotFound { best: ApproxWitness, grid_evaluations: u64, lattice_attempts: u64 },
}

impl Approximation {
    pub fn witness(&self) -> &ApproxWitness {
        match self {
            Approximation::Found(w) => w,
            Approximation::NotFound { best, .. } => best,
        }
    }

    pub fn found(&self) -> Option<&ApproxWitness> {
        match self {
            Approximation::Found(w) => Some(w),
            Approximation::NotFound { .. } => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Approximation::Found(_))
    }
}

fn max_fast(t: f64, xs: &[f64], ph: &[f64]) -> f64 {
    xs.iter().zip(ph).map(|(&x, &p)| fast_residual(t, x, p)).fold(0.0, f64::max)
}

/// Local minimum of the largest residual on `[lo, hi]`. Near a feasible
/// time every residual is quasiconvex, hence so is their maximum.
fn refine(t: f64, lo: f64, hi: f64, xs: &[f64], ph: &[f64]) -> f64 {
    let (mut a, mut b) = (lo.max(f64::MIN_POSITIVE), hi);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if max_fast(m1, xs, ph) <= max_fast(m2, xs, ph) {
            b = m2;
        } else {
            a = m1;
        }
        if b - a <= f64::EPSILON * b.abs() {
            break;
        }
    }
    let m = 0.5 * (a + b);
    if max_fast(m, xs, ph) <= max_fast(t, xs, ph) {
        m
    } else {
        t
    }
}

/// Keeps the refined time only when its exact residual is no worse.
fn polish(t: f64, h: f64, t_lo: f64, target: &UnimodularTarget, xs: &[f64], ph: &[f64], method: Method, bound: f64) -> ApproxWitness {
    let raw = ApproxWitness::at(t, target, method, bound);
    let r = refine(t, (t - h).max(t_lo), t + h, xs, ph);
    let refined = ApproxWitness::at(r, target, method, bound.max(r));
    if refined.max_residual <= raw.max_residual {
        refined
    } else {
        raw
    }
}

fn grid_step(eps: f64, xs: &[f64]) -> f64 {
    let xmax = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    eps / (TAU * xmax)
}

struct Scan {
    found: Option<f64>,
    best: (f64, f64),
    evaluations: u64,
    t_end: f64,
}

const BLOCK: u64 = 1 << 15;

/// Smallest grid time `t_start + k * step` with every fast residual below
/// `eps`, blocks evaluated in parallel.
fn grid_scan(xs: &[f64], ph: &[f64], eps: f64, t_start: f64, step: f64, budget: u64) -> Scan {
    let mut best = (t_start, f64::INFINITY);
    let mut k0 = 0u64;
    while k0 < budget {
        let len = BLOCK.min(budget - k0);
        let vals: Vec<f64> =
            (0..len).into_par_iter().map(|i| max_fast(t_start + (k0 + i) as f64 * step, xs, ph)).collect();
        for (i, &v) in vals.iter().enumerate() {
            let t = t_start + (k0 + i as u64) as f64 * step;
            if v < best.1 {
                best = (t, v);
            }
            if v < eps {
                return Scan { found: Some(t), best, evaluations: k0 + i as u64 + 1, t_end: t };
            }
        }
        k0 += len;
    }
    Scan { found: None, best, evaluations: k0, t_end: t_start + k0.saturating_sub(1) as f64 * step }
}

/// Points with negative sign are mirrored: `exp(2 pi i t (-x))` approximates
/// `exp(2 pi i phi)` iff `exp(2 pi i t x)` approximates `exp(-2 pi i phi)`.
fn mirrored(target: &UnimodularTarget) -> (Vec<NumericReal>, Vec<f64>) {
    target
        .points
        .iter()
        .zip(&target.phases)
        .map(|(x, &p)| if x.is_negative() { (x.neg(), (1.0 - p).rem_euclid(1.0)) } else { (x.clone(), p) })
        .unzip()
}

/// Smallest `t = (phi + m) / x >= t_lo`, `t > 0`, for one positive point.
fn single_point(x: &NumericReal, phase: f64, t_lo: f64) -> Result<f64, KroneckerError> {
    let p = x.precision().max(128);
    let xr = x.to_rational().ok_or(crate::numkit::NumkitError::NonFinite)?;
    let phr = rational_from_f64(phase).ok_or(crate::numkit::NumkitError::NonFinite)?;
    let lo = rational_from_f64(t_lo).ok_or(crate::numkit::NumkitError::NonFinite)?;
    let mut m = (&lo * &xr - &phr).ceil().to_integer();
    loop {
        let t = (Rational::from_integer(m.clone()) + &phr) / &xr;
        if t.is_positive() {
            let tf = NumericReal::from_rational(&t, p)?.to_f64();
            if tf >= t_lo {
                return Ok(tf);
            }
        }
        m += 1;
    }
}

struct LatticeRun {
    found: Option<f64>,
    best: (f64, f64),
    attempts: u64,
    max_t: f64,
}

fn nearest_plane(basis: &[Vec<BigInt>], y: &[BigInt]) -> Vec<BigInt> {
    let n = basis.len();
    let to_q = |v: &[BigInt]| v.iter().cloned().map(Rational::from_integer).collect::<Vec<_>>();
    let dot = |a: &[Rational], b: &[Rational]| a.iter().zip(b).map(|(x, y)| x * y).sum::<Rational>();
    let mut star: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut norms: Vec<Rational> = Vec::with_capacity(n);
    for b in basis {
        let mut v = to_q(b);
        for (s, nrm) in star.iter().zip(&norms) {
            let mu = dot(&to_q(b), s) / nrm;
            for (vi, si) in v.iter_mut().zip(s) {
                *vi -= &mu * si;
            }
        }
        norms.push(dot(&v, &v));
        star.push(v);
    }
    let mut rest: Vec<BigInt> = y.to_vec();
    for i in (0..n).rev() {
        let c = round_to_integer(&(dot(&to_q(&rest), &star[i]) / &norms[i]));
        if !c.is_zero() {
            for (r, b) in rest.iter_mut().zip(&basis[i]) {
                *r -= &c * b;
            }
        }
    }
    y.iter().zip(&rest).map(|(a, b)| a - b).collect()
}

/// Inhomogeneous simultaneous approximation through the reference point
/// `x_0`: with `t = (phi_0 + n) / x_0` the residual at `x_0` vanishes and the
/// others need `|| n alpha_j + beta_j || < eta`, where `alpha_j = x_j / x_0`
/// and `beta_j = phi_0 alpha_j - phi_j`. A window of `n` values is encoded
/// in a weighted first coordinate (Kannan embedding) and the closest vector
/// is approximated by nearest-plane rounding on the reduced basis.
#[allow(clippy::too_many_arguments)]
fn lattice_search(
    xs: &[NumericReal],
    ph: &[f64],
    target: &UnimodularTarget,
    fx: &[f64],
    fph: &[f64],
    eps: f64,
    t_lo: f64,
    attempts: u64,
) -> Result<LatticeRun, KroneckerError> {
    let k = xs.len();
    let r = (0..k).max_by(|&a, &b| xs[a].cmp_value(&xs[b])).expect("nonempty");
    let order: Vec<usize> = std::iter::once(r).chain((0..k).filter(|&j| j != r)).collect();
    let eta = (eps / 2.0).min(1.0).asin() / PI;
    let prec = 256usize;
    let x0 = xs[r].with_precision(prec)?;
    let phi0 = NumericReal::from_f64(ph[r], prec)?;
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for &j in &order[1..] {
        let a = xs[j].with_precision(prec)?.div(&x0)?;
        let b = phi0.mul(&a).sub(&NumericReal::from_f64(ph[j], prec)?);
        alpha.push(a);
        beta.push(b);
    }
    let n_lo: BigInt = {
        let v = rational_from_f64(t_lo).unwrap_or_default() * x0.to_rational().unwrap_or_default()
            - rational_from_f64(ph[r]).unwrap_or_default();
        v.ceil().to_integer().max(BigInt::zero())
    };
    let base_window = (4.0 / (2.0 * eta).powi(k as i32 - 1)).max(16.0);
    let h = grid_step(eps, fx);
    let mut run = LatticeRun { found: None, best: (t_lo, f64::INFINITY), attempts: 0, max_t: t_lo };
    let mut a = 0u64;
    while run.attempts < attempts {
        let level = (a / 4) as i32;
        let slot = a % 4;
        a += 1;
        let window = base_window * 2f64.powi(level);
        if !window.is_finite() || window > 1e30 {
            break;
        }
        let nw = BigInt::from(window.ceil() as u128);
        let center = &n_lo + &nw / 2 + &nw * BigInt::from(slot);
        // K large enough that the window weight W = 2 K eta / N stays >= 2^10
        let kbits = (((1024.0 * window / (2.0 * eta)).log2().ceil()) as u32).max(48);
        let kk = BigInt::one() << kbits as usize;
        let w = {
            let eta_q = rational_from_f64(eta).unwrap_or_default();
            let v = round_to_integer(&(eta_q * Rational::from_integer(&kk * 2) / Rational::from_integer(nw.clone())));
            v.max(BigInt::one())
        };
        let mut basis: Vec<Vec<BigInt>> = Vec::with_capacity(k);
        let mut row0 = vec![w.clone()];
        row0.extend(alpha.iter().map(|al| al.scaled_integer(kbits)));
        basis.push(row0);
        for j in 1..k {
            let mut row = vec![BigInt::zero(); k];
            row[j] = kk.clone();
            basis.push(row);
        }
        let mut y = vec![&w * &center];
        y.extend(beta.iter().map(|b| -b.scaled_integer(kbits)));
        let reduced = lll_reduce(&basis, &default_delta())?;
        let v = nearest_plane(&reduced, &y);
        let mut candidates = vec![v.clone()];
        for b in &reduced {
            candidates.push(v.iter().zip(b).map(|(p, q)| p + q).collect());
            candidates.push(v.iter().zip(b).map(|(p, q)| p - q).collect());
        }
        for c in candidates {
            if run.attempts >= attempts {
                break;
            }
            run.attempts += 1;
            let (n, rem) = c[0].div_rem(&w);
            if !rem.is_zero() || n < n_lo {
                continue;
            }
            let t = NumericReal::from_bigint(&n, prec)?
                .add(&phi0)
                .div(&x0)?
                .to_f64();
            if !(t > 0.0 && t >= t_lo) {
                continue;
            }
            run.max_t = run.max_t.max(t);
            let m = max_fast(t, fx, fph);
            if m < eps.min(2.0) * 1.5 {
                let wit = polish(t, h, t_lo, target, fx, fph, Method::Lattice, t);
                if wit.max_residual < run.best.1 {
                    run.best = (wit.t, wit.max_residual);
                }
                if wit.max_residual < eps && run.found.is_none_or(|f| wit.t < f) {
                    run.found = Some(wit.t);
                }
            } else if m < run.best.1 {
                run.best = (t, m);
            }
        }
        if run.found.is_some() {
            break;
        }
    }
    Ok(run)
}

/// Finds `t >= t_min`, `t > 0`, with every residual below `eps`.
pub fn solve_kronecker_approx(
    target: &UnimodularTarget,
    eps: f64,
    t_min: f64,
    opts: &SolveOptions,
) -> Result<Approximation, KroneckerError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(KroneckerError::BadTolerance);
    }
    let (xs, ph) = mirrored(target);
    let fx: Vec<f64> = xs.iter().map(NumericReal::to_f64).collect();
    let step = grid_step(eps, &fx);
    let t_lo = if t_min > 0.0 { t_min } else { 0.0 };

    if xs.len() == 1 {
        let t = single_point(&xs[0], ph[0], t_lo.max(f64::MIN_POSITIVE))?;
        let w = ApproxWitness::at(t, target, opts.method, t);
        return Ok(if w.max_residual < eps {
            Approximation::Found(w)
        } else {
            Approximation::NotFound { best: w, grid_evaluations: 0, lattice_attempts: 0 }
        });
    }

    let mut attempts = 0;
    let mut best: Option<ApproxWitness> = None;
    if opts.method == Method::Lattice {
        let run = lattice_search(&xs, &ph, target, &fx, &ph, eps, t_lo, opts.lattice_attempts)?;
        attempts = run.attempts;
        if let Some(t) = run.found {
            return Ok(Approximation::Found(ApproxWitness::at(t, target, Method::Lattice, run.max_t)));
        }
        if run.best.1.is_finite() {
            best = Some(ApproxWitness::at(run.best.0, target, Method::Lattice, run.max_t));
        }
    }

    let t_start = if t_lo > 0.0 { t_lo } else { step };
    let scan = grid_scan(&fx, &ph, eps, t_start, step, opts.grid_evaluations);
    if let Some(t) = scan.found {
        let w = polish(t, step, t_start, target, &fx, &ph, Method::Grid, scan.t_end);
        if w.max_residual < eps {
            return Ok(Approximation::Found(w));
        }
    }
    let grid_best = ApproxWitness::at(scan.best.0, target, Method::Grid, scan.t_end);
    let best = match best {
        Some(b) if b.max_residual <= grid_best.max_residual => b,
        _ => grid_best,
    };
    Ok(Approximation::NotFound { best, grid_evaluations: scan.evaluations, lattice_attempts: attempts })
}

/// Exact common period `lcm(q_j) / gcd(p_j)` of rational points `p_j / q_j`.
fn rational_period(xs: &[Rational]) -> Rational {
    let l = xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let g = xs.iter().fold(BigInt::zero(), |acc, x| acc.gcd(&x.numer().abs()));
    Rational::new(l, g)
}

fn atom_points(sigma: &Measure) -> Result<Vec<Position>, KroneckerError> {
    if !sigma.is_atomic() {
        return Err(MeasureError::NotAtomic.into());
    }
    if sigma.atoms().is_empty() {
        return Err(KroneckerError::NoAtoms);
    }
    Ok(sigma.atoms().iter().map(|a| a.pos.clone()).collect())
}

fn to_numeric(p: &Position) -> Result<NumericReal, KroneckerError> {
    Ok(match p {
        Position::Exact(s) => match s.as_rational() {
            Some(r) => NumericReal::from_rational(r, crate::numkit::DEFAULT_PRECISION)?,
            None => return Err(MeasureError::Numkit(crate::numkit::NumkitError::UnassignedSymbol(s.to_string())).into()),
        },
        Position::Float(x) => NumericReal::from_f64(*x, crate::numkit::DEFAULT_PRECISION)?,
    })
}

/// A Dirichlet witness: every `exp(2 pi i t x)` close to 1 over the atoms
/// of `sigma`. Atoms at 0 impose nothing and are skipped. Rational atoms
/// in the exact tier get the exact common period.
pub fn rigidity_witness(
    sigma: &Measure,
    eps: f64,
    t_min: f64,
    opts: &SolveOptions,
) -> Result<Approximation, KroneckerError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(KroneckerError::BadTolerance);
    }
    let points: Vec<Position> = atom_points(sigma)?.into_iter().filter(|p| !p.is_zero()).collect();
    if points.is_empty() {
        let t = t_min.max(1.0);
        return Ok(Approximation::Found(ApproxWitness {
            t,
            residuals: Vec::new(),
            max_residual: 0.0,
            method: opts.method,
            search_bound: t,
        }));
    }
    let rationals: Option<Vec<Rational>> = points
        .iter()
        .map(|p| match p {
            Position::Exact(s) => s.as_rational().cloned(),
            Position::Float(_) => None,
        })
        .collect();
    if let Some(rs) = rationals {
        let period = rational_period(&rs);
        let lo = rational_from_f64(t_min.max(0.0)).unwrap_or_default();
        let mut k = (&lo / &period).ceil().to_integer().max(BigInt::one());
        if Rational::from_integer(k.clone()) * &period < lo {
            k += 1;
        }
        let t_exact = Rational::from_integer(k) * &period;
        let t = crate::numkit::rational::rational_to_f64(&t_exact);
        let residuals = vec![0.0; rs.len()];
        return Ok(Approximation::Found(ApproxWitness {
            t,
            residuals,
            max_residual: 0.0,
            method: opts.method,
            search_bound: t,
        }));
    }
    let xs = points.iter().map(to_numeric).collect::<Result<Vec<_>, _>>()?;
    let target = UnimodularTarget::dirichlet(xs)?;
    solve_kronecker_approx(&target, eps, t_min, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialFailure {
    pub phases: Vec<f64>,
    pub best_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KroneckerReport {
    pub trials: usize,
    pub successes: usize,
    pub success_fraction: f64,
    /// Largest `max_residual` among successful trials.
    pub max_residual: Option<f64>,
    pub failures: Vec<TrialFailure>,
}

/// Solves `trials` approximation problems with uniformly random phases over
/// the atoms of `sigma`.
pub fn verify_kronecker_property(
    sigma: &Measure,
    trials: usize,
    eps: f64,
    t_min: f64,
    opts: &SolveOptions,
    seed: u64,
) -> Result<KroneckerReport, KroneckerError> {
    let points = atom_points(sigma)?;
    let xs = points.iter().map(to_numeric).collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase_sets: Vec<Vec<f64>> = (0..trials).map(|_| (0..xs.len()).map(|_| rng.gen::<f64>()).collect()).collect();
    verify_with_phases(&xs, &phase_sets, eps, t_min, opts)
}

pub(crate) fn verify_with_phases(
    xs: &[NumericReal],
    phase_sets: &[Vec<f64>],
    eps: f64,
    t_min: f64,
    opts: &SolveOptions,
) -> Result<KroneckerReport, KroneckerError> {
    let mut report =
        KroneckerReport { trials: phase_sets.len(), successes: 0, success_fraction: 0.0, max_residual: None, failures: Vec::new() };
    for phases in phase_sets {
        let target = UnimodularTarget::new(xs.to_vec(), phases.clone())?;
        match solve_kronecker_approx(&target, eps, t_min, opts)? {
            Approximation::Found(w) => {
                report.successes += 1;
                report.max_residual = Some(report.max_residual.map_or(w.max_residual, |m: f64| m.max(w.max_residual)));
            }
            Approximation::NotFound { best, .. } => {
                report.failures.push(TrialFailure { phases: phases.clone(), best_residual: best.max_residual })
            }
        }
    }
    if report.trials > 0 {
        report.success_fraction = report.successes as f64 / report.trials as f64;
    }
    Ok(report)
}

/// Residuals of a witness recomputed at `precision` bits for the points.
pub fn recheck_residuals(t: f64, target: &UnimodularTarget, precision: usize) -> Result<Vec<f64>, KroneckerError> {
    let pts = target.points.iter().map(|x| x.with_precision(precision)).collect::<Result<Vec<_>, _>>()?;
    let tgt = UnimodularTarget { points: pts, phases: target.phases.clone() };
    Ok(exact_residuals(t, &tgt))
}
