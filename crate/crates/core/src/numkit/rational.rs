//! Arbitrary-precision rationals and their text forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::NumkitError;

/// Exact rational number. `num_rational` keeps it normalized: the
/// denominator is positive and coprime to the numerator.
pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Canonical text: `p` for integers, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, or a decimal literal such as `-0.125` or `3e-2`.
/// Decimals are read exactly, so `0.3` is `3/10`.
pub fn parse_rational(text: &str) -> Result<Rational, NumkitError> {
    let s = text.trim();
    let bad = || NumkitError::Parse(format!("invalid rational `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(NumkitError::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(BigRational::new(p, q));
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return None;
    }
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    Some(r)
}

/// Exact binary value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

/// The rational spelled by the shortest decimal that round-trips `x`;
/// `0.3_f64` becomes `3/10` rather than its binary expansion.
pub fn rational_from_decimal_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x:e}"))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratios of huge integers: divide after shifting into range
        let bits = r.numer().bits().max(r.denom().bits()) as i64 - 1000;
        let shift = bits.max(0) as usize;
        let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Nearest integer, ties away from zero.
pub fn round_to_integer(r: &Rational) -> BigInt {
    let two = BigInt::from(2);
    let n = r.numer() * &two + if r.is_negative() { -r.denom() } else { r.denom().clone() };
    let d = r.denom() * two;
    if r.is_negative() {
        -((-n).div_floor(&d))
    } else {
        n.div_floor(&d)
    }
}

/// `round(a / b)` for integers with `b > 0`, ties toward +infinity.
pub fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let num: BigInt = a * 2 + b;
    num.div_floor(&(b * 2))
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("6/4").unwrap(), rational(3, 2));
        assert_eq!(parse_rational("-0.3").unwrap(), rational(-3, 10));
        assert_eq!(parse_rational("3e-2").unwrap(), rational(3, 100));
        assert_eq!(parse_rational("  7 ").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn canonical_format() {
        assert_eq!(format_rational(&rational(4, 2)), "2");
        assert_eq!(format_rational(&rational(-3, 9)), "-1/3");
        let r = rational(-22, 7);
        assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn decimal_float_lifting() {
        assert_eq!(rational_from_decimal_f64(0.3).unwrap(), rational(3, 10));
        assert_eq!(rational_from_f64(0.5).unwrap(), rational(1, 2));
        assert_ne!(rational_from_f64(0.3).unwrap(), rational(3, 10));
    }

    #[test]
    fn rounding() {
        assert_eq!(round_to_integer(&rational(5, 2)), BigInt::from(3));
        assert_eq!(round_to_integer(&rational(-5, 2)), BigInt::from(-3));
        assert_eq!(round_to_integer(&rational(7, 3)), BigInt::from(2));
        assert_eq!(div_round(&BigInt::from(-7), &BigInt::from(2)), BigInt::from(-3));
        assert_eq!(div_round(&BigInt::from(7), &BigInt::from(3)), BigInt::from(2));
    }
}
