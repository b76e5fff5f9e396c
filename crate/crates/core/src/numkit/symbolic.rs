//! Exact reals over a declared transcendence basis.
//!
//! Basis symbols are formal: by declaration they are positive reals that are
//! algebraically independent over the rationals. A [`SymbolicReal`] is then a
//! rational-coefficient Laurent polynomial in those symbols, and two values
//! are equal exactly when their normalized forms are.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::numeric::NumericReal;
use super::rational::{format_rational, parse_rational, Rational};
use super::{NumkitError, DEFAULT_PRECISION};

/// Product of basis symbols raised to nonzero integer powers.
/// The empty product is the constant monomial `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exponents: BTreeMap<String, i32>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn symbol(name: &str) -> Self {
        Self::power(name, 1)
    }

    pub fn power(name: &str, exp: i32) -> Self {
        let mut exponents = BTreeMap::new();
        if exp != 0 {
            exponents.insert(name.to_string(), exp);
        }
        Self { exponents }
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &BTreeMap<String, i32> {
        &self.exponents
    }

    pub fn exponent(&self, name: &str) -> i32 {
        self.exponents.get(name).copied().unwrap_or(0)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.exponents.keys().map(String::as_str)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exponents = self.exponents.clone();
        for (s, e) in &other.exponents {
            let slot = exponents.entry(s.clone()).or_insert(0);
            *slot += e;
            if *slot == 0 {
                exponents.remove(s);
            }
        }
        Monomial { exponents }
    }

    pub fn powi(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        Monomial {
            exponents: self.exponents.iter().map(|(s, e)| (s.clone(), e * n)).collect(),
        }
    }

    pub fn inverse(&self) -> Monomial {
        self.powi(-1)
    }

    /// Sum of absolute exponents.
    pub fn total_degree(&self) -> u32 {
        self.exponents.values().map(|e| e.unsigned_abs()).sum()
    }

    fn write_factors(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, e)) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{s}^{e}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        self.write_factors(f)
    }
}

/// `rational_part + sum(coeff * monomial)` with no zero coefficients and no
/// constant monomial among the terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicReal {
    rational_part: Rational,
    terms: BTreeMap<Monomial, Rational>,
}

impl SymbolicReal {
    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Self { rational_part: r, terms: BTreeMap::new() }
    }

    pub fn symbol(name: &str) -> Self {
        Self::term(Rational::one(), Monomial::symbol(name))
    }

    pub fn term(coeff: Rational, monomial: Monomial) -> Self {
        let mut out = Self::zero();
        out.add_term(coeff, monomial);
        out
    }

    /// Builds a value from arbitrary (possibly repeated, possibly zero)
    /// terms, normalizing as it goes.
    pub fn from_terms(rational_part: Rational, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut out = Self::from_rational(rational_part);
        for (m, c) in terms {
            out.add_term(c, m);
        }
        out
    }

    fn add_term(&mut self, coeff: Rational, monomial: Monomial) {
        if coeff.is_zero() {
            return;
        }
        if monomial.is_one() {
            self.rational_part += coeff;
            return;
        }
        let remove = {
            let slot = self.terms.entry(monomial.clone()).or_insert_with(Rational::zero);
            *slot += coeff;
            slot.is_zero()
        };
        if remove {
            self.terms.remove(&monomial);
        }
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rational_part
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.rational_part.is_zero() && self.terms.is_empty()
    }

    /// The value as a rational, when it has no symbolic terms.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.terms.is_empty().then_some(&self.rational_part)
    }

    /// `coeff * monomial` form (including the pure-rational case).
    pub fn as_single_term(&self) -> Option<(Rational, Monomial)> {
        match (self.rational_part.is_zero(), self.terms.len()) {
            (_, 0) => Some((self.rational_part.clone(), Monomial::one())),
            (true, 1) => self.terms.iter().next().map(|(m, c)| (c.clone(), m.clone())),
            _ => None,
        }
    }

    /// Coordinates over the monomial basis, with the constant monomial `1`
    /// standing for the rational part.
    pub fn coordinates(&self) -> BTreeMap<Monomial, Rational> {
        let mut out = self.terms.clone();
        if !self.rational_part.is_zero() {
            out.insert(Monomial::one(), self.rational_part.clone());
        }
        out
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        let mut names: Vec<&str> = self.terms.keys().flat_map(|m| m.symbols()).collect();
        names.sort_unstable();
        names.dedup();
        names.into_iter()
    }

    /// Positive under the declaration that every basis symbol is a positive
    /// real. Decided only for single-term values; `None` otherwise.
    pub fn is_positive(&self) -> Option<bool> {
        if self.is_zero() {
            return Some(false);
        }
        if self.terms.is_empty() {
            return Some(self.rational_part.is_positive());
        }
        let all_pos = self.rational_part >= Rational::zero() && self.terms.values().all(|c| c.is_positive());
        let all_neg = self.rational_part <= Rational::zero() && self.terms.values().all(|c| c.is_negative());
        if all_pos {
            Some(true)
        } else if all_neg {
            Some(false)
        } else {
            None
        }
    }

    pub fn scale(&self, k: &Rational) -> SymbolicReal {
        if k.is_zero() {
            return SymbolicReal::zero();
        }
        SymbolicReal {
            rational_part: &self.rational_part * k,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Multiplicative inverse; representable only for single-term values.
    pub fn checked_inverse(&self) -> Option<SymbolicReal> {
        let (c, m) = self.as_single_term()?;
        if c.is_zero() {
            return None;
        }
        Some(SymbolicReal::term(c.recip(), m.inverse()))
    }

    pub fn checked_div(&self, other: &SymbolicReal) -> Option<SymbolicReal> {
        Some(self * &other.checked_inverse()?)
    }

    /// Integer power; negative powers need an invertible base.
    pub fn checked_powi(&self, n: i32) -> Option<SymbolicReal> {
        if n < 0 {
            return self.checked_inverse()?.checked_powi(-n);
        }
        if let Some((c, m)) = self.as_single_term() {
            return Some(SymbolicReal::term(num_traits::pow(c, n as usize), m.powi(n)));
        }
        let mut acc = SymbolicReal::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        Some(acc)
    }

    /// Evaluates under an assignment of basis symbols, at the smallest
    /// precision found in the assignment.
    pub fn eval(&self, assignment: &BTreeMap<String, NumericReal>) -> Result<NumericReal, NumkitError> {
        sym_eval(self, assignment)
    }
}

/// `rational_part + sum(coeff * prod(assigned^exp))`, computed at the minimum
/// precision of the assignment (the default precision when it is empty).
pub fn sym_eval(x: &SymbolicReal, assignment: &BTreeMap<String, NumericReal>) -> Result<NumericReal, NumkitError> {
    if let Some(name) = x.symbols().find(|s| !assignment.contains_key(*s)) {
        return Err(NumkitError::UnassignedSymbol(name.to_string()));
    }
    let prec = assignment.values().map(NumericReal::precision).min().unwrap_or(DEFAULT_PRECISION);
    let work = prec + 32;
    let mut acc = NumericReal::from_rational(&x.rational_part, work)?;
    for (m, c) in &x.terms {
        let mut term = NumericReal::from_rational(c, work)?;
        for (s, e) in m.exponents() {
            let base = assignment[s].with_precision(work)?;
            term = term.mul(&base.powi(*e)?);
        }
        acc = acc.add(&term);
    }
    acc.with_precision(prec)
}

impl Add for &SymbolicReal {
    type Output = SymbolicReal;
    fn add(self, rhs: &SymbolicReal) -> SymbolicReal {
        let mut out = self.clone();
        out.rational_part += &rhs.rational_part;
        for (m, c) in &rhs.terms {
            out.add_term(c.clone(), m.clone());
        }
        out
    }
}

impl Sub for &SymbolicReal {
    type Output = SymbolicReal;
    fn sub(self, rhs: &SymbolicReal) -> SymbolicReal {
        self + &(-rhs)
    }
}

impl Neg for &SymbolicReal {
    type Output = SymbolicReal;
    fn neg(self) -> SymbolicReal {
        SymbolicReal {
            rational_part: -&self.rational_part,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &SymbolicReal {
    type Output = SymbolicReal;
    fn mul(self, rhs: &SymbolicReal) -> SymbolicReal {
        let left = self.coordinates();
        let right = rhs.coordinates();
        let mut out = SymbolicReal::zero();
        for (ml, cl) in &left {
            for (mr, cr) in &right {
                out.add_term(cl * cr, ml.mul(mr));
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for SymbolicReal {
            type Output = SymbolicReal;
            fn $f(self, rhs: SymbolicReal) -> SymbolicReal {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for SymbolicReal {
    type Output = SymbolicReal;
    fn neg(self) -> SymbolicReal {
        -&self
    }
}

impl From<Rational> for SymbolicReal {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

/// Canonical text: `rational{+coeff*sym^exp{*sym^exp}}`, e.g.
/// `3/10+1/200*tau^1`. Terms appear in monomial order; coefficients keep
/// their sign after the `+` (`0+-1*tau^2`).
impl fmt::Display for SymbolicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.rational_part))?;
        for (m, c) in &self.terms {
            write!(f, "+{}*", format_rational(c))?;
            m.write_factors(f)?;
        }
        Ok(())
    }
}

impl FromStr for SymbolicReal {
    type Err = NumkitError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser::new(s).parse()
    }
}

impl Serialize for SymbolicReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymbolicReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn is_symbol_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub fn is_symbol_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, chars: src.char_indices().collect(), pos: 0 }
    }

    fn err(&self, what: &str) -> NumkitError {
        let col = self.chars.get(self.pos).map(|(i, _)| *i).unwrap_or(self.src.len());
        NumkitError::Parse(format!("{what} at column {} in `{}`", col + 1, self.src))
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<SymbolicReal, NumkitError> {
        let mut out = SymbolicReal::zero();
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.err("empty expression"));
        }
        let mut first = true;
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                break;
            }
            let mut negate = false;
            if self.eat('+') {
                negate = self.eat('-');
            } else if self.eat('-') {
                negate = true;
            } else if !first {
                return Err(self.err("expected `+` or `-`"));
            }
            let (c, m) = self.term()?;
            out.add_term(if negate { -c } else { c }, m);
            first = false;
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Rational, Monomial), NumkitError> {
        self.skip_ws();
        let mut coeff = Rational::one();
        let mut mono = Monomial::one();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == '.' => {
                    coeff *= self.number()?;
                }
                Some(c) if is_symbol_start(c) => {
                    let name = self.ident();
                    let exp = if self.eat('^') { self.exponent()? } else { 1 };
                    mono = mono.mul(&Monomial::power(&name, exp));
                }
                _ => return Err(self.err("expected a number or symbol")),
            }
            if !self.eat('*') {
                break;
            }
        }
        Ok((coeff, mono))
    }

    fn number(&mut self) -> Result<Rational, NumkitError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        // a `/` directly followed by digits continues the rational
        if self.peek() == Some('/') && matches!(self.chars.get(self.pos + 1), Some((_, c)) if c.is_ascii_digit()) {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text = self.slice(start, self.pos);
        parse_rational(text).map_err(|_| self.err("malformed number"))
    }

    fn exponent(&mut self) -> Result<i32, NumkitError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.slice(start, self.pos).parse().map_err(|_| self.err("malformed exponent"))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if is_symbol_char(c)) {
            self.pos += 1;
        }
        self.slice(start, self.pos).to_string()
    }

    fn slice(&self, from: usize, to: usize) -> &'a str {
        let a = self.chars.get(from).map(|(i, _)| *i).unwrap_or(self.src.len());
        let b = self.chars.get(to).map(|(i, _)| *i).unwrap_or(self.src.len());
        &self.src[a..b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rational::{int, rational};

    fn tau() -> SymbolicReal {
        SymbolicReal::symbol("tau")
    }

    #[test]
    fn canonical_text_round_trip() {
        let x = &SymbolicReal::from_rational(rational(3, 10)) + &tau().scale(&rational(1, 200));
        assert_eq!(x.to_string(), "3/10+1/200*tau^1");
        assert_eq!(x.to_string().parse::<SymbolicReal>().unwrap(), x);

        let y = SymbolicReal::term(rational(-1, 2), Monomial::power("h", -2).mul(&Monomial::symbol("tau")));
        assert_eq!(y.to_string(), "0+-1/2*h^-2*tau^1");
        assert_eq!(y.to_string().parse::<SymbolicReal>().unwrap(), y);
    }

    #[test]
    fn parser_accepts_loose_forms() {
        let x: SymbolicReal = "2*tau - tau^2 + 1/3".parse().unwrap();
        let expect = SymbolicReal::from_terms(
            rational(1, 3),
            [(Monomial::symbol("tau"), int(2)), (Monomial::power("tau", 2), int(-1))],
        );
        assert_eq!(x, expect);
        let t: SymbolicReal = "τ^2".parse().unwrap();
        assert_eq!(t, SymbolicReal::term(int(1), Monomial::power("τ", 2)));
        assert!("2 tau".parse::<SymbolicReal>().is_err());
        assert!("".parse::<SymbolicReal>().is_err());
        assert!("tau^x".parse::<SymbolicReal>().is_err());
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = &tau() - &tau();
        assert!(x.is_zero());
        assert!(x.terms().is_empty());
        let a = "1+tau*h^-1".parse::<SymbolicReal>().unwrap();
        let b = "h*tau^-1".parse::<SymbolicReal>().unwrap();
        let prod = &a * &b;
        assert_eq!(prod, "1+h*tau^-1".parse().unwrap());
    }

    #[test]
    fn inverse_and_powers() {
        let x = tau().scale(&int(3));
        let inv = x.checked_inverse().unwrap();
        assert_eq!(&x * &inv, SymbolicReal::one());
        assert_eq!(x.checked_powi(-2).unwrap(), SymbolicReal::term(rational(1, 9), Monomial::power("tau", -2)));
        let sum = &tau() + &SymbolicReal::one();
        assert!(sum.checked_inverse().is_none());
        assert_eq!(sum.checked_powi(2).unwrap(), "1+2*tau+tau^2".parse().unwrap());
    }

    #[test]
    fn eval_requires_all_symbols() {
        let x = "3/10+tau".parse::<SymbolicReal>().unwrap();
        let err = x.eval(&BTreeMap::new()).unwrap_err();
        assert!(matches!(err, NumkitError::UnassignedSymbol(ref s) if s == "tau"));
    }

    #[test]
    fn eval_zero_assignment() {
        let x = "3/10+tau".parse::<SymbolicReal>().unwrap();
        let mut a = BTreeMap::new();
        a.insert("tau".to_string(), NumericReal::from_i64(0, 128).unwrap());
        let v = x.eval(&a).unwrap();
        assert!((v.to_f64() - 0.3).abs() < 1e-17);
    }

    #[test]
    fn positivity_by_declaration() {
        assert_eq!(tau().is_positive(), Some(true));
        assert_eq!((-tau()).is_positive(), Some(false));
        assert_eq!("1-tau".parse::<SymbolicReal>().unwrap().is_positive(), None);
    }
}
