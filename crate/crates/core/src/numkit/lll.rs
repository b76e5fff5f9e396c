//! Integral LLL reduction (all arithmetic in exact integers).
//!
//! Follows the classical integral formulation: instead of rational
//! Gram–Schmidt coefficients we keep `d_i`, the Gram determinant of the first
//! `i` vectors, and `lambda_{k,j} = d_{j+1} * mu_{k,j}`, all of which are
//! integers. Every division below is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::{div_round, rational, Rational};
use super::NumkitError;

pub type IntVector = Vec<BigInt>;

/// The standard strong-reduction parameter 99/100.
pub fn default_delta() -> Rational {
    rational(99, 100)
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Returns a `delta`-LLL-reduced basis of the lattice spanned by `basis`.
pub fn lll_reduce(basis: &[IntVector], delta: &Rational) -> Result<Vec<IntVector>, NumkitError> {
    let quarter = rational(1, 4);
    if *delta <= quarter || *delta >= Rational::one() {
        return Err(NumkitError::Domain(format!("LLL delta must lie in (1/4, 1), got {delta}")));
    }
    let Some(first) = basis.first() else {
        return Ok(Vec::new());
    };
    let dim = first.len();
    if basis.iter().any(|v| v.len() != dim) {
        return Err(NumkitError::Domain("basis vectors have different lengths".into()));
    }
    let mut red = Reducer::new(basis.to_vec(), delta.numer().clone(), delta.denom().clone())?;
    red.run()?;
    Ok(red.b)
}

struct Reducer {
    b: Vec<IntVector>,
    // d[i] = Gram determinant of b[0..i]; d[0] = 1
    d: Vec<BigInt>,
    // lambda[k][j] for j < k
    lambda: Vec<Vec<BigInt>>,
    delta_num: BigInt,
    delta_den: BigInt,
}

impl Reducer {
    fn new(b: Vec<IntVector>, delta_num: BigInt, delta_den: BigInt) -> Result<Self, NumkitError> {
        let n = b.len();
        let mut d = vec![BigInt::zero(); n + 1];
        d[0] = BigInt::one();
        let mut lambda = vec![Vec::new(); n];
        for (k, row) in lambda.iter_mut().enumerate() {
            *row = vec![BigInt::zero(); k];
        }
        let mut r = Self { b, d, lambda, delta_num, delta_den };
        for k in 0..n {
            r.gram_schmidt_row(k)?;
        }
        Ok(r)
    }

    fn gram_schmidt_row(&mut self, k: usize) -> Result<(), NumkitError> {
        for j in 0..=k {
            let mut u = dot(&self.b[k], &self.b[j]);
            for i in 0..j {
                u = (&self.d[i + 1] * &u - &self.lambda[k][i] * &self.lambda[j][i]) / &self.d[i];
            }
            if j < k {
                self.lambda[k][j] = u;
            } else {
                if u.is_zero() {
                    return Err(NumkitError::DependentBasis);
                }
                self.d[k + 1] = u;
            }
        }
        Ok(())
    }

    fn size_reduce(&mut self, k: usize, l: usize) {
        let twice: BigInt = &self.lambda[k][l] * 2;
        if twice.abs() <= self.d[l + 1] {
            return;
        }
        let q = div_round(&self.lambda[k][l], &self.d[l + 1]);
        let bl = self.b[l].clone();
        for (x, y) in self.b[k].iter_mut().zip(&bl) {
            *x -= &q * y;
        }
        self.lambda[k][l] -= &q * &self.d[l + 1];
        for i in 0..l {
            let t = &q * &self.lambda[l][i];
            self.lambda[k][i] -= t;
        }
    }

    fn lovasz_fails(&self, k: usize) -> bool {
        // B_k < (delta - mu^2) B_{k-1}  <=>  den*(d_{k+1} d_{k-1} + lambda^2) < num*d_k^2
        let lam = &self.lambda[k][k - 1];
        let lhs = &self.delta_den * (&self.d[k + 1] * &self.d[k - 1] + lam * lam);
        let rhs = &self.delta_num * &self.d[k] * &self.d[k];
        lhs < rhs
    }

    fn swap(&mut self, k: usize) {
        let n = self.b.len();
        self.b.swap(k, k - 1);
        for j in 0..k - 1 {
            let t = std::mem::take(&mut self.lambda[k][j]);
            self.lambda[k][j] = std::mem::replace(&mut self.lambda[k - 1][j], t);
        }
        let lam = self.lambda[k][k - 1].clone();
        let new_d = (&self.d[k - 1] * &self.d[k + 1] + &lam * &lam) / &self.d[k];
        for i in k + 1..n {
            let t = self.lambda[i][k].clone();
            let upd = (&self.d[k + 1] * &self.lambda[i][k - 1] - &lam * &t) / &self.d[k];
            self.lambda[i][k] = upd;
            self.lambda[i][k - 1] = (&new_d * &t + &lam * &self.lambda[i][k]) / &self.d[k + 1];
        }
        self.d[k] = new_d;
    }

    fn run(&mut self) -> Result<(), NumkitError> {
        let n = self.b.len();
        let mut k = 1;
        while k < n {
            self.size_reduce(k, k - 1);
            if self.lovasz_fails(k) {
                self.swap(k);
                k = (k - 1).max(1);
            } else {
                for l in (0..k - 1).rev() {
                    self.size_reduce(k, l);
                }
                k += 1;
            }
        }
        Ok(())
    }
}

/// Gram determinant of the vectors (exact).
pub fn gram_determinant(basis: &[IntVector]) -> BigInt {
    let n = basis.len();
    let gram: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| Rational::from_integer(dot(&basis[i], &basis[j]))).collect())
        .collect();
    let det = super::linalg::determinant(gram);
    debug_assert!(det.is_integer());
    det.to_integer()
}

/// Squared Gram–Schmidt norms and coefficients, computed with rationals.
pub fn gram_schmidt(basis: &[IntVector]) -> (Vec<Rational>, Vec<Vec<Rational>>) {
    let n = basis.len();
    let rows: Vec<Vec<Rational>> = basis
        .iter()
        .map(|v| v.iter().cloned().map(Rational::from_integer).collect())
        .collect();
    let mut star: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let mut mu = vec![vec![Rational::zero(); n]; n];
    let rdot = |a: &[Rational], b: &[Rational]| -> Rational { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            mu[i][j] = rdot(&rows[i], &star[j]) / &norms[j];
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= &mu[i][j] * y;
            }
        }
        norms.push(rdot(&v, &v));
        star.push(v);
    }
    (norms, mu)
}

/// `b` expressed exactly over the rows of `basis` (full-rank rows), if it lies
/// in their rational span.
pub fn coordinates_in(basis: &[IntVector], target: &[BigInt]) -> Option<Vec<Rational>> {
    let n = basis.len();
    // normal equations: (B B^T) c = B t
    let gram: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| Rational::from_integer(dot(&basis[i], &basis[j]))).collect())
        .collect();
    let rhs: Vec<Rational> = basis.iter().map(|v| Rational::from_integer(dot(v, target))).collect();
    let c = super::linalg::solve(gram, rhs)?;
    let back: Vec<Rational> = (0..target.len())
        .map(|col| c.iter().zip(basis).map(|(ci, v)| ci * Rational::from_integer(v[col].clone())).sum())
        .collect();
    let ok = back.iter().zip(target).all(|(x, t)| *x == Rational::from_integer(t.clone()));
    ok.then_some(c)
}

/// Integer-valued check for [`coordinates_in`].
pub fn in_integer_span(basis: &[IntVector], target: &[BigInt]) -> bool {
    coordinates_in(basis, target).is_some_and(|c| c.iter().all(|x| x.denom().is_one()))
}

pub fn norm_squared(v: &[BigInt]) -> BigInt {
    dot(v, v)
}

pub fn is_even_sum(v: &[BigInt]) -> bool {
    v.iter().fold(BigInt::zero(), |a, x| a + x).is_even()
}
