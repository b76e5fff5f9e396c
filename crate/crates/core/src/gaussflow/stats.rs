use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

use super::{FlowError, PathSample};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub lags: Vec<f64>,
    pub empirical: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl CovarianceReport {
    /// Lags where the estimate is within `k` standard errors of the law.
    pub fn within(&self, k: f64) -> Vec<bool> {
        (0..self.lags.len())
            .map(|i| (self.empirical[i] - self.theoretical[i]).abs() <= k * self.stderr[i])
            .collect()
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

fn lag_index(sample: &PathSample, lag: f64) -> Result<usize, FlowError> {
    let step = sample.spec.grid.step;
    let k = (lag / step).round();
    if !(k >= 0.0) || (k * step - lag).abs() > 1e-9 * lag.abs().max(1.0) || k as usize >= sample.times.len() {
        return Err(FlowError::OffGridLag(lag));
    }
    Ok(k as usize)
}

/// Cross-path covariance of `X_u` and `X_{u+lag}` with `u` the first grid time.
pub fn empirical_autocovariance(sample: &PathSample, lags: &[f64]) -> Result<CovarianceReport, FlowError> {
    empirical_autocovariance_at(sample, 0, lags)
}

/// As [`empirical_autocovariance`] with `u` the grid point `base`.
pub fn empirical_autocovariance_at(
    sample: &PathSample,
    base: usize,
    lags: &[f64],
) -> Result<CovarianceReport, FlowError> {
    let n = sample.paths();
    if n < 2 {
        return Err(FlowError::TooFewPaths { needed: 2, got: n });
    }
    let mut report = CovarianceReport { lags: lags.to_vec(), empirical: vec![], theoretical: vec![], stderr: vec![] };
    for &lag in lags {
        let k = base + lag_index(sample, lag)?;
        if k >= sample.times.len() {
            return Err(FlowError::OffGridLag(lag));
        }
        let a: Vec<f64> = sample.values.iter().map(|p| p[base]).collect();
        let b: Vec<f64> = sample.values.iter().map(|p| p[k]).collect();
        let (ma, _) = mean_sd(&a);
        let (mb, _) = mean_sd(&b);
        let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
        let cov = prods.iter().sum::<f64>() / (n as f64 - 1.0);
        let (_, sd) = mean_sd(&prods);
        report.empirical.push(cov);
        report.stderr.push((sd / (n as f64).sqrt()).max(f64::MIN_POSITIVE));
        report.theoretical.push(sample.theoretical_covariance(lag)?);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub freq: f64,
    pub power: f64,
    pub stderr: f64,
}

/// Path-averaged periodogram `|sum_k X_k exp(-2 pi i f t_k)|^2 / N^2`; an
/// atom of weight `w` shows a peak of height about `w`.
pub fn spectral_estimate(sample: &PathSample, freq_grid: &[f64]) -> Result<Vec<SpectralPoint>, FlowError> {
    let mut freqs: Vec<f64> = sample
        .spec
        .spectral
        .atoms()
        .iter()
        .map(|a| a.pos.to_f64().map(|x| (x * sample.scale).abs()))
        .collect::<Result<_, _>>()?;
    freqs.push(0.0);
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    let gap = freqs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let span = sample.spec.grid.span();
    if gap.is_finite() && span < 4.0 / gap {
        return Err(FlowError::InsufficientSpan { span, required: 4.0 / gap });
    }
    let n = sample.times.len() as f64;
    let p = sample.paths() as f64;
    Ok(freq_grid
        .par_iter()
        .map(|&f| {
            let rot: Vec<Complex64> = sample.times.iter().map(|&t| Complex64::from_polar(1.0, -TAU * f * t)).collect();
            let powers: Vec<f64> = sample
                .values
                .iter()
                .map(|path| path.iter().zip(&rot).map(|(x, r)| r * x).sum::<Complex64>().norm_sqr() / (n * n))
                .collect();
            let (power, sd) = mean_sd(&powers);
            SpectralPoint { freq: f, power, stderr: sd / p.sqrt() }
        })
        .collect())
}

/// Frequencies of the `k` highest local maxima.
pub fn strongest_peaks(points: &[SpectralPoint], k: usize) -> Vec<f64> {
    let mut peaks: Vec<&SpectralPoint> = (0..points.len())
        .filter(|&i| {
            let left = i == 0 || points[i - 1].power <= points[i].power;
            let right = i + 1 == points.len() || points[i + 1].power < points[i].power;
            left && right
        })
        .map(|i| &points[i])
        .collect();
    peaks.sort_by(|a, b| b.power.total_cmp(&a.power));
    peaks.into_iter().take(k).map(|p| p.freq).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityReport {
    pub t_w: f64,
    /// `2 (C(0) - C(t_w))`.
    pub theoretical: f64,
    /// Mean of `|X_{u + t_w} - X_u|^2` over paths and grid points.
    pub empirical: f64,
    pub stderr: f64,
    pub variance: f64,
    pub tol: f64,
    /// Empirical within three standard errors of the theoretical value.
    pub agrees: bool,
    pub pass: bool,
}

/// Second-order rigidity along `t_w`: both `E|X_{u+t_w} - X_u|^2` and its
/// closed form must be below `tol * Var`.
pub fn rigidity_check(sample: &PathSample, t_w: f64, tol: f64) -> Result<RigidityReport, FlowError> {
    let shifted_times: Vec<f64> = sample.times.iter().map(|&u| u + t_w).collect();
    let shifted = sample.regenerate(&shifted_times)?;
    let per_path: Vec<f64> = sample
        .values
        .iter()
        .zip(&shifted)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (y - x).powi(2)).sum::<f64>() / a.len() as f64)
        .collect();
    let (empirical, sd) = mean_sd(&per_path);
    let stderr = sd / (per_path.len() as f64).sqrt();
    let c0 = sample.theoretical_covariance(0.0)?;
    let theoretical = 2.0 * (c0 - sample.theoretical_covariance(t_w)?);
    let agrees = (empirical - theoretical).abs() <= 3.0 * stderr;
    let pass = theoretical < tol * c0 && empirical < tol * c0;
    Ok(RigidityReport { t_w, theoretical, empirical, stderr, variance: c0, tol, agrees, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeTest {
    pub time: f64,
    /// D'Agostino–Pearson `K^2`; absent when the variance is zero.
    pub k2: Option<f64>,
    pub p_value: Option<f64>,
    pub reject: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianityReport {
    pub alpha: f64,
    /// Level applied at each time (Bonferroni over the tested times).
    pub alpha_per_time: f64,
    pub times: Vec<TimeTest>,
    pub degenerate: bool,
    pub pass: bool,
}

/// `(Z_skew, Z_kurt)` of the D'Agostino–Pearson omnibus test, or `None` for
/// zero variance.
pub fn dagostino_z(xs: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m = |k: i32| xs.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4) = (m(2), m(3), m(4));
    if !(m2 > 1e-300 * mean.abs().max(1.0)) {
        return None;
    }
    let b1 = m3 / m2.powf(1.5);
    let y = b1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let a = (2.0 / (w2 - 1.0)).sqrt();
    let ya = y / a;
    let zs = delta * (ya + (ya * ya + 1.0).sqrt()).ln();

    let b2 = m4 / (m2 * m2);
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let varb2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (b2 - e) / varb2.sqrt();
    let sqrtbeta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let aa = 6.0 + 8.0 / sqrtbeta1 * (2.0 / sqrtbeta1 + (1.0 + 4.0 / (sqrtbeta1 * sqrtbeta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * aa);
    let denom = 1.0 + x * (2.0 / (aa - 4.0)).sqrt();
    let term2 = denom.signum() * ((1.0 - 2.0 / aa) / denom.abs()).cbrt();
    let zk = (term1 - term2) / (2.0 / (9.0 * aa)).sqrt();
    Some((zs, zk))
}

pub const MIN_GAUSSIANITY_PATHS: usize = 100;

/// Marginal normality across paths at up to ten evenly spaced grid times.
/// `K^2` is chi-square with two degrees of freedom, so `p = exp(-K^2 / 2)`.
pub fn gaussianity_test(sample: &PathSample, alpha: f64) -> Result<GaussianityReport, FlowError> {
    let n = sample.paths();
    if n < MIN_GAUSSIANITY_PATHS {
        return Err(FlowError::TooFewPaths { needed: MIN_GAUSSIANITY_PATHS, got: n });
    }
    let count = sample.times.len();
    let k = count.min(10);
    let idx: Vec<usize> =
        if k == 1 { vec![0] } else { (0..k).map(|i| i * (count - 1) / (k - 1)).collect() };
    let alpha_per_time = alpha / k as f64;
    let mut times = Vec::with_capacity(k);
    let mut degenerate = false;
    for &i in &idx {
        let col: Vec<f64> = sample.values.iter().map(|p| p[i]).collect();
        match dagostino_z(&col) {
            Some((zs, zk)) => {
                let k2 = zs * zs + zk * zk;
                let p = (-k2 / 2.0).exp();
                times.push(TimeTest { time: sample.times[i], k2: Some(k2), p_value: Some(p), reject: p < alpha_per_time });
            }
            None => {
                degenerate = true;
                times.push(TimeTest { time: sample.times[i], k2: None, p_value: None, reject: false });
            }
        }
    }
    let pass = !degenerate && times.iter().all(|t| !t.reject);
    Ok(GaussianityReport { alpha, alpha_per_time, times, degenerate, pass })
}

#[cfg(test)]
mod tests {
    use super::super::{rescale_paths, simulate, Grid, ProcessSpec};
    use super::*;
    use crate::numkit::rational::rational;
    use crate::specmeasure::Measure;

    fn spec(atoms: &[(f64, i64, i64)], grid: Grid, paths: usize) -> ProcessSpec {
        let m = Measure::floats(&atoms.iter().map(|&(x, p, q)| (x, rational(p, q))).collect::<Vec<_>>()).unwrap();
        ProcessSpec::new(m, grid, paths, 11)
    }

    #[test]
    fn omnibus_matches_reference_values() {
        let x: Vec<f64> = (0..120u64).map(|i| ((i * 37) % 101) as f64 / 101.0 + ((i * i) % 13) as f64 / 13.0).collect();
        let (zs, zk) = dagostino_z(&x).unwrap();
        assert!((zs - 0.49607686330417566).abs() < 1e-9, "{zs}");
        assert!((zk + 2.1321987433446283).abs() < 1e-9, "{zk}");
        assert!((zs * zs + zk * zk - 4.792363735426122).abs() < 1e-9);
        let y: Vec<f64> = (0..120u64).map(|i| (((i * 37) % 101) as f64 / 101.0).powi(3)).collect();
        let (a, b) = dagostino_z(&y).unwrap();
        assert!((a * a + b * b - 18.62886139776916).abs() < 1e-8);
        assert_eq!(dagostino_z(&[1.0; 50]), None);
    }

    #[test]
    fn lag_zero_and_off_grid() {
        let s = simulate(&spec(&[(1.0, 1, 1)], Grid { t0: 0.0, step: 0.25, count: 8 }, 2000)).unwrap();
        let r = empirical_autocovariance(&s, &[0.0, 0.5]).unwrap();
        assert_eq!(r.theoretical, vec![2.0, -2.0]);
        assert!(r.within(3.0).iter().all(|&b| b), "{r:?}");
        assert!(matches!(empirical_autocovariance(&s, &[0.3]), Err(FlowError::OffGridLag(_))));
        assert!(matches!(empirical_autocovariance(&s, &[2.0]), Err(FlowError::OffGridLag(_))));
    }

    #[test]
    fn periodogram_peaks() {
        let g = Grid { t0: 0.0, step: 1.0 / 32.0, count: 2048 };
        let s = simulate(&spec(&[(1.0, 1, 1)], g, 40)).unwrap();
        let fg: Vec<f64> = (0..=256).map(|k| k as f64 / 64.0).collect();
        let est = spectral_estimate(&s, &fg).unwrap();
        let peak = strongest_peaks(&est, 1)[0];
        assert!((peak - 1.0).abs() <= 1.0 / 64.0);
        let twice = rescale_paths(&s, 2.0).unwrap();
        let peak2 = strongest_peaks(&spectral_estimate(&twice, &fg).unwrap(), 1)[0];
        assert!((peak2 - 2.0).abs() <= 1.0 / 64.0);
        let pair = simulate(&spec(&[(1.0, 1, 2), (2f64.sqrt(), 1, 2)], g, 40)).unwrap();
        let mut two = strongest_peaks(&spectral_estimate(&pair, &fg).unwrap(), 2);
        two.sort_by(f64::total_cmp);
        assert!((two[0] - 1.0).abs() <= 1.0 / 64.0 && (two[1] - 2f64.sqrt()).abs() <= 1.0 / 64.0, "{two:?}");
        let short = simulate(&spec(&[(1.0, 1, 1)], Grid { t0: 0.0, step: 0.5, count: 4 }, 2)).unwrap();
        assert!(matches!(spectral_estimate(&short, &fg), Err(FlowError::InsufficientSpan { .. })));
    }

    #[test]
    fn rigidity_exact_cases() {
        let s = simulate(&spec(&[(1.0, 1, 2), (2f64.sqrt(), 1, 2)], Grid { t0: 0.0, step: 0.5, count: 10 }, 50)).unwrap();
        let r = rigidity_check(&s, 0.0, 0.01).unwrap();
        assert_eq!((r.theoretical, r.empirical), (0.0, 0.0));
        let r = rigidity_check(&s, 29.0, 0.01).unwrap();
        assert!((r.theoretical - 2.0 * (2.0 - 1.997066673186573574740544647859)).abs() < 1e-12);
        assert!(r.pass);
        let third = Measure::exact(&[("1/3", rational(1, 1))]).unwrap();
        let s = simulate(&ProcessSpec::new(third, Grid { t0: 0.0, step: 0.25, count: 10 }, 20, 3)).unwrap();
        let r = rigidity_check(&s, 3.0, 0.01).unwrap();
        assert_eq!((r.theoretical, r.empirical), (0.0, 0.0));
    }

    #[test]
    fn gaussianity_and_squares() {
        let base = spec(&[(1.0, 1, 2), (2f64.sqrt(), 1, 2)], Grid { t0: 0.0, step: 0.3, count: 20 }, 500);
        let rejected = (0..100u64)
            .filter(|&seed| !gaussianity_test(&simulate(&ProcessSpec { seed, ..base.clone() }).unwrap(), 0.01).unwrap().pass)
            .count();
        // a calibrated level-0.01 test rejects more than 5 of 100 runs with probability < 1e-3
        assert!(rejected <= 5, "{rejected}");
        let s = simulate(&ProcessSpec { paths: 2000, ..base }).unwrap();
        let mut sq = s.clone();
        sq.values.iter_mut().flatten().for_each(|v| *v *= *v);
        assert!(!gaussianity_test(&sq, 0.01).unwrap().pass);
        let mut zero = s.clone();
        zero.values.iter_mut().flatten().for_each(|v| *v = 0.0);
        let z = gaussianity_test(&zero, 0.01).unwrap();
        assert!(z.degenerate && !z.pass);
        let few = simulate(&spec(&[(1.0, 1, 1)], Grid { t0: 0.0, step: 0.3, count: 2 }, 10)).unwrap();
        assert!(gaussianity_test(&few, 0.01).is_err());
    }
}
