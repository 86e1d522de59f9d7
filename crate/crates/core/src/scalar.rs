//! Numeric kernel abstraction.
//!
//! Every tree algorithm is written once against [`Scalar`] and runs either on
//! exact rationals (certified verdicts) or on `f64` with an absolute tolerance.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number used by the certified kernel.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("cannot parse number `{0}`")]
    Parse(String),
    #[error("non-finite value {0}")]
    NonFinite(String),
}

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// True for the exact kernel.
    const EXACT: bool;
    /// Name used in reports.
    const NAME: &'static str;

    /// Absolute tolerance used for sign decisions (zero when exact).
    fn tol() -> Self;
    fn from_i64(v: i64) -> Self;
    fn ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn as_f64(&self) -> f64;
    /// Converts a float; rationals take the exact binary value.
    fn of_f64(v: f64) -> Result<Self, ScalarError>;
    fn to_json(&self) -> serde_json::Value;

    fn is_pos(&self) -> bool {
        *self > Self::tol()
    }
    fn is_neg(&self) -> bool {
        *self < -Self::tol()
    }
    fn is_nonneg(&self) -> bool {
        !self.is_neg()
    }
    fn approx_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).approx_zero()
    }
    fn pos_part(&self) -> Self {
        if *self > Self::zero() {
            self.clone()
        } else {
            Self::zero()
        }
    }
    fn neg_part(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            Self::zero()
        }
    }
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
    /// Parses `"0.25"`, `"-3"`, `"1/3"` or `"1e-3"`.
    fn parse(s: &str) -> Result<Self, ScalarError> {
        parse_rational(s).map(|r| Self::from_rational(&r))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "float";

    fn tol() -> Self {
        1e-9
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_rational(&self) -> Rational {
        BigRational::from_float(*self).unwrap_or_else(Rational::zero)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn of_f64(v: f64) -> Result<Self, ScalarError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ScalarError::NonFinite(v.to_string()))
        }
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn tol() -> Self {
        Rational::zero()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn of_f64(v: f64) -> Result<Self, ScalarError> {
        BigRational::from_float(v).ok_or_else(|| ScalarError::NonFinite(v.to_string()))
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Large operands: scale down before dividing.
    let bits = r.numer().bits().max(r.denom().bits()) as i64 - 1000;
    let shift = bits.max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
    n / d
}

/// Parses a decimal, fraction or scientific literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ScalarError> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let num = parse_decimal(a.trim())?;
        let den = parse_decimal(b.trim())?;
        if den.is_zero() {
            return Err(ScalarError::Parse(s.to_string()));
        }
        return Ok(num / den);
    }
    parse_decimal(t)
}

fn parse_decimal(s: &str) -> Result<Rational, ScalarError> {
    let err = || ScalarError::Parse(s.to_string());
    if s.is_empty() {
        return Err(err());
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| err())?;
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let r = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

/// Parses a JSON value (number or string) as an exact rational.
///
/// Numbers go through their shortest decimal representation, so `0.1` becomes
/// exactly `1/10`.
pub fn rational_from_json(v: &serde_json::Value) -> Result<Rational, ScalarError> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_integer(BigInt::from(i)))
            } else {
                parse_rational(&n.to_string())
            }
        }
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(ScalarError::Parse(other.to_string())),
    }
}

pub fn from_f64_lossy<S: Scalar>(v: f64) -> S {
    S::of_f64(v).unwrap_or_else(|_| S::zero())
}

/// Shorthand for an exact fraction.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::ratio(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-3").unwrap(), rat(-3, 1));
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational(" 2.5E1 ").unwrap(), rat(25, 1));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn json_numbers_are_decimal() {
        let v: serde_json::Value = serde_json::from_str("0.1").unwrap();
        assert_eq!(rational_from_json(&v).unwrap(), rat(1, 10));
        let v: serde_json::Value = serde_json::from_str("\"7/2\"").unwrap();
        assert_eq!(rational_from_json(&v).unwrap(), rat(7, 2));
    }

    #[test]
    fn tolerance_semantics() {
        assert!(1e-12f64.approx_zero());
        assert!(!rat(1, 1_000_000_000_000).approx_zero());
        assert!(rat(-1, 2).is_neg());
        assert_eq!(rat(-3, 2).neg_part(), rat(3, 2));
        assert_eq!(format_rational(&rat(6, 3)), "2");
        assert_eq!(format_rational(&rat(-1, 3)), "-1/3");
    }

    #[test]
    fn huge_rational_to_float() {
        let big = Rational::new(num_traits::pow(BigInt::from(10), 400), num_traits::pow(BigInt::from(10), 399));
        assert!((big.as_f64() - 10.0).abs() < 1e-9);
    }
}
