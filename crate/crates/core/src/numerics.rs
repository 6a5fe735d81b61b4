//! Scalar field used throughout the crate.
//!
//! Every recursion in this crate is a rational function of its inputs, so the
//! algorithms run over exact [`Rational`]s. The precision-tagged [`Real`] mode
//! only appears at output boundaries, where square roots and decimal
//! renderings are needed.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-size rational number.
pub type Rational = num_rational::BigRational;

/// Significant digits used for real-mode output unless the caller asks otherwise.
pub const DEFAULT_DIGITS: u32 = 25;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Division that reports a zero divisor instead of panicking.
pub fn checked_div(num: &Rational, den: &Rational) -> Result<Rational> {
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(num / den)
}

/// Parses `p`, `p/q` or a plain decimal literal such as `-1.25` into an exact rational.
pub fn parse_rational(text: &str) -> std::result::Result<Rational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".to_string());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !whole_digits.chars().all(|c| c.is_ascii_digit())
            || (whole_digits.is_empty() && frac.is_empty())
        {
            return Err(format!("bad decimal literal {s:?}"));
        }
        let digits = format!("{whole_digits}{frac}");
        let mantissa: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| format!("bad decimal literal {s:?}"))?
        };
        let scale = pow10(frac.len() as u32);
        let value = Rational::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    let p: BigInt = s.parse().map_err(|_| format!("bad number {s:?}"))?;
    Ok(Rational::from_integer(p))
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), e as usize)
}

/// `10^e` as a rational, for any sign of `e`.
fn pow10_rat(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(pow10(e as u32))
    } else {
        Rational::new(BigInt::one(), pow10((-e) as u32))
    }
}

/// Number of decimal digits of a positive integer.
fn digit_count(n: &BigInt) -> i64 {
    n.magnitude().to_str_radix(10).len() as i64
}

/// `floor(log10(q))` for `q > 0`, computed exactly.
fn floor_log10(q: &Rational) -> i64 {
    debug_assert!(q.is_positive());
    let guess = digit_count(q.numer()) - digit_count(q.denom());
    // 10^(guess-1) < q < 10^(guess+1)
    if *q >= pow10_rat(guess) {
        guess
    } else {
        guess - 1
    }
}

/// A positive integer `mantissa` with exactly `digits` digits and the decimal
/// exponent of its leading digit, so the value is `mantissa * 10^(exponent - digits + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Significand {
    negative: bool,
    mantissa: BigInt,
    exponent: i64,
    digits: u32,
}

impl Significand {
    fn value(&self) -> Rational {
        let v = Rational::from_integer(self.mantissa.clone())
            * pow10_rat(self.exponent - self.digits as i64 + 1);
        if self.negative {
            -v
        } else {
            v
        }
    }

    /// Carries a rounded-up mantissa of `10^digits` into the exponent.
    fn normalize(mut self) -> Self {
        if self.mantissa == pow10(self.digits) {
            self.mantissa = pow10(self.digits - 1);
            self.exponent += 1;
        }
        self
    }

    fn render(&self) -> String {
        let s = self.mantissa.to_str_radix(10);
        let d = self.digits as i64;
        let e = self.exponent;
        let body = if e >= d - 1 {
            format!("{s}{}", "0".repeat((e - d + 1) as usize))
        } else if e >= 0 {
            let (int_part, frac_part) = s.split_at((e + 1) as usize);
            format!("{int_part}.{frac_part}")
        } else {
            format!("0.{}{s}", "0".repeat((-e - 1) as usize))
        };
        if self.negative {
            format!("-{body}")
        } else {
            body
        }
    }
}

/// Rounds `q != 0` to `digits` significant digits, ties away from zero.
fn round_significant(q: &Rational, digits: u32) -> Significand {
    let magnitude = q.abs();
    let exponent = floor_log10(&magnitude);
    let scaled = &magnitude * pow10_rat(digits as i64 - 1 - exponent);
    Significand {
        negative: q.is_negative(),
        mantissa: scaled.round().to_integer(),
        exponent,
        digits,
    }
    .normalize()
}

/// Correctly rounded `sqrt(q)` for `q > 0`.
fn sqrt_significant(q: &Rational, digits: u32) -> Significand {
    let exponent = floor_log10(q).div_euclid(2);
    let shift = digits as i64 - 1 - exponent;
    // round(sqrt(X)) = floor((isqrt(floor(4X)) + 1) / 2)
    let four_x = q * pow10_rat(2 * shift) * int(4);
    let root = four_x.floor().to_integer().sqrt();
    let mantissa: BigInt = (root + 1u32) / 2u32;
    Significand {
        negative: false,
        mantissa,
        exponent,
        digits,
    }
    .normalize()
}

fn check_digits(digits: u32) -> Result<()> {
    if digits == 0 {
        return Err(Error::Domain("digit count must be at least 1".into()));
    }
    Ok(())
}

/// Correctly rounded decimal rendering of an exact rational with `digits`
/// significant digits. Zero renders as `"0"`.
pub fn rational_to_decimal(q: &Rational, digits: u32) -> Result<String> {
    check_digits(digits)?;
    if q.is_zero() {
        return Ok("0".to_string());
    }
    Ok(round_significant(q, digits).render())
}

/// Like [`rational_to_decimal`], but integers that fit in `digits` digits
/// are written exactly, without a fractional part.
pub fn table_decimal(q: &Rational, digits: u32) -> Result<String> {
    check_digits(digits)?;
    if q.is_integer() && digit_count(&q.to_integer()) <= i64::from(digits) {
        return Ok(q.to_integer().to_string());
    }
    rational_to_decimal(q, digits)
}

/// Correctly rounded decimal rendering of `sqrt(q)`, computed from the exact radicand.
pub fn sqrt_to_decimal(q: &Rational, digits: u32) -> Result<String> {
    check_digits(digits)?;
    if q.is_negative() {
        return Err(Error::Domain(format!("square root of negative value {q}")));
    }
    if q.is_zero() {
        return Ok("0".to_string());
    }
    Ok(sqrt_significant(q, digits).render())
}

/// A real number approximated by a decimal rational, tagged with the number
/// of significant digits it is good for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Real {
    value: Rational,
    digits: u32,
}

impl Real {
    /// Rounds `value` to `digits` significant digits.
    pub fn new(value: &Rational, digits: u32) -> Result<Self> {
        check_digits(digits)?;
        let value = if value.is_zero() {
            Rational::zero()
        } else {
            round_significant(value, digits).value()
        };
        Ok(Real { value, digits })
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = rational_to_decimal(&self.value, self.digits).map_err(|_| fmt::Error)?;
        f.write_str(&text)
    }
}

/// Either an exact rational or a precision-tagged real.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Exact(Rational),
    Real(Real),
}

impl Scalar {
    pub fn exact(q: Rational) -> Self {
        Scalar::Exact(q)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(int(n))
    }

    /// The stored value; for reals this is the rounded decimal approximant.
    pub fn as_rational(&self) -> &Rational {
        match self {
            Scalar::Exact(q) => q,
            Scalar::Real(r) => &r.value,
        }
    }

    /// Precision tag, `None` in exact mode.
    pub fn digits(&self) -> Option<u32> {
        match self {
            Scalar::Exact(_) => None,
            Scalar::Real(r) => Some(r.digits),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        self.as_rational().is_zero()
    }

    fn combine(&self, other: &Scalar, value: Rational) -> Scalar {
        let digits = match (self.digits(), other.digits()) {
            (None, None) => return Scalar::Exact(value),
            (Some(d), None) | (None, Some(d)) => d,
            (Some(a), Some(b)) => a.min(b),
        };
        Scalar::Real(Real::new(&value, digits).expect("tag is at least 1"))
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        let value = checked_div(self.as_rational(), other.as_rational())?;
        Ok(self.combine(other, value))
    }
}

impl From<Rational> for Scalar {
    fn from(q: Rational) -> Self {
        Scalar::Exact(q)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Real(r) => write!(f, "{r}"),
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let value = self.as_rational() $op rhs.as_rational();
                self.combine(rhs, value)
            }
        }
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Real(r) => Scalar::Real(Real {
                value: -r.value,
                digits: r.digits,
            }),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.as_rational().cmp(other.as_rational()))
    }
}

/// Decimal string of `s` with `digits` significant digits, correctly rounded
/// from the stored value.
pub fn to_decimal(s: &Scalar, digits: u32) -> Result<String> {
    rational_to_decimal(s.as_rational(), digits)
}

/// Square root in real mode, correctly rounded to `digits` significant digits.
pub fn sqrt_real(s: &Scalar, digits: u32) -> Result<Scalar> {
    check_digits(digits)?;
    let q = s.as_rational();
    if q.is_negative() {
        return Err(Error::Domain(format!("square root of negative value {q}")));
    }
    let digits = s.digits().map_or(digits, |tag| tag.min(digits));
    let value = if q.is_zero() {
        Rational::zero()
    } else {
        sqrt_significant(q, digits).value()
    };
    Ok(Scalar::Real(Real { value, digits }))
}
