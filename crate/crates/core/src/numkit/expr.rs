//! Small expression language for numeric-tier inputs:
//! `1+sqrt(2)`, `2^(1/3)`, `pi^2*31/1024`, `(1+sqrt(5))/2`.
//!
//! Rational subexpressions stay exact until they meet an irrational
//! operation, so `2^(1/3)` is a true cube root rather than `2^0.333…`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::numeric::NumericReal;
use super::rational::{parse_rational, Rational};
use super::NumkitError;

#[derive(Clone, Debug)]
enum Value {
    Exact(Rational),
    Approx(NumericReal),
}

impl Value {
    fn approx(self, prec: usize) -> Result<NumericReal, NumkitError> {
        match self {
            Value::Exact(r) => NumericReal::from_rational(&r, prec),
            Value::Approx(x) => Ok(x),
        }
    }
}

/// Evaluates `text` at `precision` bits.
pub fn eval_expr(text: &str, precision: usize) -> Result<NumericReal, NumkitError> {
    let work = precision + 32;
    let mut p = ExprParser { src: text, bytes: text.as_bytes(), pos: 0, prec: work };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    v.approx(work)?.with_precision(precision)
}

/// Exact value of `text` when it involves only rational arithmetic.
pub fn eval_exact(text: &str) -> Option<Rational> {
    let mut p = ExprParser { src: text, bytes: text.as_bytes(), pos: 0, prec: 64 };
    match p.expr().ok()? {
        Value::Exact(r) if p.at_end() => Some(r),
        _ => None,
    }
}

struct ExprParser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    prec: usize,
}

impl ExprParser<'_> {
    fn err(&self, what: &str) -> NumkitError {
        NumkitError::Parse(format!("{what} at column {} in `{}`", self.pos + 1, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.bytes.len()
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Value, NumkitError> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = self.binary(op, acc, rhs)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Value, NumkitError> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = self.binary(op, acc, rhs)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value, NumkitError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(match self.unary()? {
                    Value::Exact(r) => Value::Exact(-r),
                    Value::Approx(x) => Value::Approx(x.neg()),
                })
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Value, NumkitError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return self.pow(base, exp);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Value, NumkitError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.named(),
            _ => Err(self.err("expected a number, constant, or function")),
        }
    }

    fn number(&mut self) -> Result<Value, NumkitError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        parse_rational(&self.src[start..self.pos]).map(Value::Exact).map_err(|_| self.err("malformed number"))
    }

    fn named(&mut self) -> Result<Value, NumkitError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        let prec = self.prec;
        if self.peek() != Some(b'(') {
            return match name {
                "pi" => Ok(Value::Approx(NumericReal::pi(prec)?)),
                "e" => Ok(Value::Approx(NumericReal::euler(prec)?)),
                "phi" => {
                    let s5 = NumericReal::from_i64(5, prec)?.sqrt()?;
                    let one = NumericReal::from_i64(1, prec)?;
                    Ok(Value::Approx(s5.add(&one).div(&NumericReal::from_i64(2, prec)?)?))
                }
                _ => Err(self.err(&format!("unknown constant `{name}`"))),
            };
        }
        self.pos += 1;
        let mut args = vec![self.expr()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            args.push(self.expr()?);
        }
        if self.peek() != Some(b')') {
            return Err(self.err("expected `)`"));
        }
        self.pos += 1;
        let arity = |n: usize| -> Result<(), NumkitError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(NumkitError::Parse(format!("`{name}` takes {n} argument(s)")))
            }
        };
        match name {
            "sqrt" => {
                arity(1)?;
                self.root(args.remove(0), 2)
            }
            "cbrt" => {
                arity(1)?;
                self.root(args.remove(0), 3)
            }
            "root" => {
                arity(2)?;
                let n = match &args[1] {
                    Value::Exact(r) if r.is_integer() && r.is_positive() => r.to_integer().to_u32(),
                    _ => None,
                }
                .ok_or_else(|| NumkitError::Parse("root index must be a positive integer".into()))?;
                self.root(args.remove(0), n)
            }
            "exp" => {
                arity(1)?;
                Ok(Value::Approx(args.remove(0).approx(prec)?.exp()?))
            }
            "ln" => {
                arity(1)?;
                Ok(Value::Approx(args.remove(0).approx(prec)?.ln()?))
            }
            _ => Err(self.err(&format!("unknown function `{name}`"))),
        }
    }

    fn root(&self, x: Value, n: u32) -> Result<Value, NumkitError> {
        if let Value::Exact(r) = &x {
            if let Some(exact) = exact_root(r, n) {
                return Ok(Value::Exact(exact));
            }
        }
        Ok(Value::Approx(x.approx(self.prec)?.root(n)?))
    }

    fn binary(&self, op: u8, a: Value, b: Value) -> Result<Value, NumkitError> {
        if let (Value::Exact(x), Value::Exact(y)) = (&a, &b) {
            return match op {
                b'+' => Ok(Value::Exact(x + y)),
                b'-' => Ok(Value::Exact(x - y)),
                b'*' => Ok(Value::Exact(x * y)),
                _ if y.is_zero() => Err(NumkitError::DivisionByZero),
                _ => Ok(Value::Exact(x / y)),
            };
        }
        let (x, y) = (a.approx(self.prec)?, b.approx(self.prec)?);
        Ok(Value::Approx(match op {
            b'+' => x.add(&y),
            b'-' => x.sub(&y),
            b'*' => x.mul(&y),
            _ => x.div(&y)?,
        }))
    }

    fn pow(&self, base: Value, exp: Value) -> Result<Value, NumkitError> {
        if let Value::Exact(e) = &exp {
            let small = |n: &BigInt| n.to_i32().filter(|v| v.unsigned_abs() <= 1 << 16);
            if let (Some(p), Some(q)) = (small(e.numer()), small(e.denom()).map(|q| q as u32)) {
                let powered = match base {
                    Value::Exact(b) => {
                        if b.is_zero() && p < 0 {
                            return Err(NumkitError::DivisionByZero);
                        }
                        Value::Exact(num_traits::pow::pow(if p < 0 { b.recip() } else { b }, p.unsigned_abs() as usize))
                    }
                    Value::Approx(b) => Value::Approx(b.powi(p)?),
                };
                return if q.is_one() { Ok(powered) } else { self.root(powered, q) };
            }
        }
        let b = base.approx(self.prec)?;
        Ok(Value::Approx(b.pow(&exp.approx(self.prec)?)?))
    }
}

fn exact_root(r: &Rational, n: u32) -> Option<Rational> {
    if r.is_negative() && n % 2 == 0 {
        return None;
    }
    let root_int = |x: &BigInt| -> Option<BigInt> {
        let c = x.abs().nth_root(n);
        (num_traits::pow(c.clone(), n as usize) == x.abs()).then(|| if x.is_negative() { -c } else { c })
    };
    Some(Rational::new(root_int(r.numer())?, root_int(r.denom())?))
}
