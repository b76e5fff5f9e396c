//! High-precision binary floating reals.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::rational::Rational;
use super::NumkitError;

const RM: RoundingMode = RoundingMode::ToEven;
/// Smallest precision accepted for a [`NumericReal`].
pub const MIN_PRECISION: usize = 53;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// A finite real carried at `precision` significant bits (at least 53).
#[derive(Clone, Debug)]
pub struct NumericReal {
    value: BigFloat,
    precision: usize,
}

impl NumericReal {
    fn wrap(value: BigFloat, precision: usize) -> Result<Self, NumkitError> {
        if precision < MIN_PRECISION {
            return Err(NumkitError::Precision(format!("{precision} bits is below the {MIN_PRECISION}-bit floor")));
        }
        if value.is_nan() || value.is_inf() {
            return Err(NumkitError::NonFinite);
        }
        Ok(Self { value, precision })
    }

    // Internal ops on already-valid operands cannot leave the finite range
    // at desk-scale magnitudes; they go through here to keep that checked.
    fn derived(value: BigFloat, precision: usize) -> Self {
        debug_assert!(!value.is_nan() && !value.is_inf(), "non-finite intermediate");
        Self { value, precision }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.value
    }

    pub fn zero(precision: usize) -> Result<Self, NumkitError> {
        Self::from_i64(0, precision)
    }

    pub fn from_i64(n: i64, precision: usize) -> Result<Self, NumkitError> {
        Self::from_bigint(&BigInt::from(n), precision)
    }

    pub fn from_f64(x: f64, precision: usize) -> Result<Self, NumkitError> {
        if !x.is_finite() {
            return Err(NumkitError::NonFinite);
        }
        Self::wrap(BigFloat::from_f64(x, precision.max(64)), precision)
    }

    pub fn from_bigint(n: &BigInt, precision: usize) -> Result<Self, NumkitError> {
        Self::wrap(bigint_to_float(n, precision), precision)
    }

    pub fn from_rational(r: &Rational, precision: usize) -> Result<Self, NumkitError> {
        let p = precision + 8;
        let n = bigint_to_float(r.numer(), p);
        let d = bigint_to_float(r.denom(), p);
        let mut v = n.div(&d, p, RM);
        v.set_precision(precision, RM).map_err(|e| NumkitError::Precision(e.to_string()))?;
        Self::wrap(v, precision)
    }

    pub fn pi(precision: usize) -> Result<Self, NumkitError> {
        Self::wrap(with_consts(|c| c.pi(precision, RM)), precision)
    }

    pub fn euler(precision: usize) -> Result<Self, NumkitError> {
        Self::wrap(with_consts(|c| c.e(precision, RM)), precision)
    }

    pub fn with_precision(&self, precision: usize) -> Result<Self, NumkitError> {
        let mut v = self.value.clone();
        v.set_precision(precision.max(64), RM).map_err(|e| NumkitError::Precision(e.to_string()))?;
        Self::wrap(v, precision)
    }

    fn joint(&self, other: &Self) -> usize {
        self.precision.min(other.precision)
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.joint(other);
        Self::derived(self.value.add(&other.value, p, RM), p)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.joint(other);
        Self::derived(self.value.sub(&other.value, p, RM), p)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.joint(other);
        Self::derived(self.value.mul(&other.value, p, RM), p)
    }

    pub fn div(&self, other: &Self) -> Result<Self, NumkitError> {
        if other.is_zero() {
            return Err(NumkitError::DivisionByZero);
        }
        let p = self.joint(other);
        Self::wrap(self.value.div(&other.value, p, RM), p)
    }

    pub fn neg(&self) -> Self {
        Self::derived(self.value.neg(), self.precision)
    }

    pub fn abs(&self) -> Self {
        Self::derived(self.value.abs(), self.precision)
    }

    pub fn powi(&self, n: i32) -> Result<Self, NumkitError> {
        if n < 0 && self.is_zero() {
            return Err(NumkitError::DivisionByZero);
        }
        let work = self.precision + 32;
        let mag = self.value.powi(n.unsigned_abs() as usize, work, RM);
        let v = if n < 0 { BigFloat::from_word(1, work).div(&mag, work, RM) } else { mag };
        Self::wrap(v, self.precision).and_then(|x| x.with_precision(self.precision))
    }

    pub fn sqrt(&self) -> Result<Self, NumkitError> {
        if self.is_negative() {
            return Err(NumkitError::Domain("square root of a negative number".into()));
        }
        Self::wrap(self.value.sqrt(self.precision, RM), self.precision)
    }

    /// Real `n`-th root; odd roots of negatives are allowed.
    pub fn root(&self, n: u32) -> Result<Self, NumkitError> {
        match n {
            0 => Err(NumkitError::Domain("zeroth root".into())),
            1 => Ok(self.clone()),
            2 => self.sqrt(),
            3 => Self::wrap(self.value.cbrt(self.precision, RM), self.precision),
            _ => {
                if self.is_zero() {
                    return Ok(self.clone());
                }
                if self.is_negative() && n % 2 == 0 {
                    return Err(NumkitError::Domain("even root of a negative number".into()));
                }
                let p = self.precision + 16;
                let ln = with_consts(|c| self.value.abs().ln(p, RM, c));
                let scaled = ln.div(&BigFloat::from_u32(n, p), p, RM);
                let mut mag = with_consts(|c| scaled.exp(p, RM, c));
                if self.is_negative() {
                    mag = mag.neg();
                }
                Self::wrap(mag, self.precision)?.with_precision(self.precision)
            }
        }
    }

    pub fn exp(&self) -> Result<Self, NumkitError> {
        Self::wrap(with_consts(|c| self.value.exp(self.precision, RM, c)), self.precision)
    }

    pub fn ln(&self) -> Result<Self, NumkitError> {
        if !self.is_positive() {
            return Err(NumkitError::Domain("logarithm of a non-positive number".into()));
        }
        Self::wrap(with_consts(|c| self.value.ln(self.precision, RM, c)), self.precision)
    }

    pub fn sin(&self) -> Result<Self, NumkitError> {
        Self::wrap(with_consts(|c| self.value.sin(self.precision, RM, c)), self.precision)
    }

    pub fn cos(&self) -> Result<Self, NumkitError> {
        Self::wrap(with_consts(|c| self.value.cos(self.precision, RM, c)), self.precision)
    }

    /// `x^y` for `x > 0`.
    pub fn pow(&self, y: &Self) -> Result<Self, NumkitError> {
        let l = self.ln()?;
        l.mul(y).exp()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.value.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.value.is_positive()
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match self.value.cmp(&other.value) {
            Some(c) if c < 0 => Ordering::Less,
            Some(0) => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        match self.to_rational() {
            Some(r) => super::rational::rational_to_f64(&r),
            None => 0.0,
        }
    }

    /// The exact binary value as a rational.
    pub fn to_rational(&self) -> Option<Rational> {
        let (m, e) = self.mantissa_exponent()?;
        Some(if e >= 0 {
            BigRational::from_integer(m << e as usize)
        } else {
            BigRational::new(m, BigInt::from(1) << (-e) as usize)
        })
    }

    /// `(m, e)` with value `m * 2^e`.
    fn mantissa_exponent(&self) -> Option<(BigInt, i64)> {
        if self.is_zero() {
            return Some((BigInt::zero(), 0));
        }
        let (words, _bits, sign, exponent, _) = self.value.as_raw_parts()?;
        let digits: Vec<u32> = words.iter().flat_map(|w| [*w as u32, (*w >> 32) as u32]).collect();
        let mag = BigUint::new(digits);
        let m = BigInt::from_biguint(
            if sign == Sign::Neg { num_bigint::Sign::Minus } else { num_bigint::Sign::Plus },
            mag,
        );
        Some((m, exponent as i64 - 64 * words.len() as i64))
    }

    /// `round(self * 2^bits)` computed exactly from the binary value.
    pub fn scaled_integer(&self, bits: u32) -> BigInt {
        let Some((m, e)) = self.mantissa_exponent() else {
            return BigInt::zero();
        };
        let shift = e + bits as i64;
        if shift >= 0 {
            m << shift as usize
        } else {
            // round half away from zero on the magnitude
            let s = (-shift) as usize;
            let mag = (m.abs() + (BigInt::from(1) << (s - 1))) >> s;
            if m.is_negative() {
                -mag
            } else {
                mag
            }
        }
    }

    /// Decimal rendering with roughly `precision * log10(2)` digits.
    pub fn to_decimal_string(&self) -> String {
        with_consts(|c| self.value.format(Radix::Dec, RM, c)).unwrap_or_else(|_| "NaN".into())
    }

    pub fn parse_decimal(text: &str, precision: usize) -> Result<Self, NumkitError> {
        let v = with_consts(|c| BigFloat::parse(text.trim(), Radix::Dec, precision, RM, c));
        if v.is_nan() {
            return Err(NumkitError::Parse(format!("invalid number `{text}`")));
        }
        Self::wrap(v, precision)
    }
}

fn bigint_to_float(n: &BigInt, precision: usize) -> BigFloat {
    if n.is_zero() {
        return BigFloat::from_word(0, precision.max(64));
    }
    let (sign, mag) = n.to_u64_digits();
    let len = mag.len();
    let exact = BigFloat::from_words(
        &mag,
        if sign == num_bigint::Sign::Minus { Sign::Neg } else { Sign::Pos },
        (64 * len) as i32,
    );
    let mut v = exact;
    // from_words keeps every bit; round to the requested precision
    let _ = v.set_precision(precision.max(64), RM);
    v
}

impl PartialEq for NumericReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl fmt::Display for NumericReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl ToPrimitive for NumericReal {
    fn to_i64(&self) -> Option<i64> {
        self.to_rational()?.to_integer().to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_rational()?.to_integer().to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(NumericReal::to_f64(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rational::rational;

    #[test]
    fn rejects_low_precision() {
        assert!(NumericReal::from_i64(1, 32).is_err());
        assert!(NumericReal::from_f64(f64::NAN, 64).is_err());
    }

    #[test]
    fn exact_rational_round_trip() {
        let x = NumericReal::from_f64(-2.5, 128).unwrap();
        assert_eq!(x.to_rational().unwrap(), rational(-5, 2));
        let big = BigInt::from(3) << 200usize;
        let y = NumericReal::from_bigint(&big, 256).unwrap();
        assert_eq!(y.to_rational().unwrap(), BigRational::from_integer(big));
    }

    #[test]
    fn scaled_integer_rounds_to_nearest() {
        let x = NumericReal::from_rational(&rational(1, 3), 128).unwrap();
        assert_eq!(x.scaled_integer(4), BigInt::from(5)); // 16/3 = 5.33
        let y = NumericReal::from_rational(&rational(-1, 3), 128).unwrap();
        assert_eq!(y.scaled_integer(4), BigInt::from(-5));
        let z = NumericReal::from_f64(-2.75, 64).unwrap();
        assert_eq!(z.scaled_integer(1), BigInt::from(-6)); // -5.5 rounds away
        assert_eq!(z.scaled_integer(0), BigInt::from(-3));
        assert_eq!(NumericReal::from_f64(2.5, 64).unwrap().scaled_integer(0), BigInt::from(3));
    }

    #[test]
    fn roots_and_constants() {
        let two = NumericReal::from_i64(2, 128).unwrap();
        let r = two.root(3).unwrap();
        assert!((r.to_f64() - 2f64.cbrt()).abs() < 1e-15);
        let r5 = two.root(5).unwrap().powi(5).unwrap();
        assert!(r5.sub(&two).abs().to_f64() < 1e-35);
        let pi = NumericReal::pi(128).unwrap();
        assert!((pi.to_f64() - std::f64::consts::PI).abs() < 1e-16);
        assert!(NumericReal::from_i64(-4, 64).unwrap().sqrt().is_err());
    }
}
