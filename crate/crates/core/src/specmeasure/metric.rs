use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{bochner, Measure, MeasureError};
use crate::numkit::rational::rational_to_f64;
use crate::numkit::Rational;

/// Truncation of the weak-topology metric on measures supported in
/// `[a, b]`. The test functions are `f_1 = 1`, `f_{2k} = cos(2 pi q_k x)` and
/// `f_{2k+1} = sin(2 pi q_k x)`, with `q_k` the Calkin–Wilf enumeration of
/// the positive rationals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub a: f64,
    pub b: f64,
    pub depth: usize,
}

impl MetricConfig {
    pub const DEFAULT_DEPTH: usize = 64;

    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b, depth: Self::DEFAULT_DEPTH }
    }
}

/// `1, 1/2, 2, 1/3, 3/2, 2/3, 3, ...`
pub fn calkin_wilf(n: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n);
    let mut q = Rational::one();
    for _ in 0..n {
        out.push(q.clone());
        let fl = q.numer().div_floor(q.denom());
        q = (Rational::from_integer(fl * 2) - &q + Rational::one()).recip();
    }
    out
}

fn check_support(m: &Measure, cfg: &MetricConfig) -> Result<(), MeasureError> {
    for a in m.atoms() {
        let x = a.pos.to_f64()?;
        if x < cfg.a || x > cfg.b {
            return Err(MeasureError::OutsideInterval(cfg.a, cfg.b));
        }
    }
    if m.density().iter().any(|p| p.l < cfg.a || p.u > cfg.b) {
        return Err(MeasureError::OutsideInterval(cfg.a, cfg.b));
    }
    Ok(())
}

/// `sum_{n <= depth} 2^-n |D_n| / (1 + |D_n|)` with
/// `D_n = int f_n dsigma - int f_n deta`.
pub fn weak_distance(sigma: &Measure, eta: &Measure, cfg: &MetricConfig) -> Result<f64, MeasureError> {
    if cfg.depth == 0 {
        return Err(MeasureError::ZeroDepth);
    }
    check_support(sigma, cfg)?;
    check_support(eta, cfg)?;
    let term = |n: usize, d: f64| 0.5f64.powi(n as i32) * d.abs() / (1.0 + d.abs());
    let mut total = term(1, sigma.total_mass() - eta.total_mass());
    let freqs = calkin_wilf(cfg.depth / 2);
    for (k, q) in freqs.iter().enumerate() {
        let n = 2 * (k + 1);
        let qf = rational_to_f64(q);
        let d = bochner(sigma, qf)? - bochner(eta, qf)?;
        total += term(n, d.re);
        if n + 1 <= cfg.depth {
            total += term(n + 1, d.im);
        }
    }
    Ok(total)
}
