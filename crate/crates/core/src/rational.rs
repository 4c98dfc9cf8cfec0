//! Exact rational helpers shared by every module.
//!
//! Values are `BigRational`s. The canonical text form is `"p/q"`, or `"p"`
//! when the denominator is one; parsing additionally accepts plain decimals
//! such as `"0.25"` or `"-3e-2"`, which are converted exactly.

use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The exact scalar used throughout the crate.
pub type Q = BigRational;

/// `n / d` as an exact rational. Panics when `d == 0`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Canonical string form (`"p/q"` or `"p"`).
pub fn format_q(value: &Q) -> String {
    value.to_string()
}

/// Parses `"p/q"`, an integer, or a finite decimal literal exactly.
pub fn parse_q(text: &str) -> Result<Q> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if text.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Q::new(num, den));
    }
    parse_decimal(text).ok_or_else(bad)
}

fn parse_decimal(text: &str) -> Option<Q> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Q::from_integer(BigInt::from_str(&all_digits).ok()?);
    let shift = exponent - frac_part.len() as i32;
    let ten = qi(10);
    value *= pow_i(&ten, shift);
    if negative {
        value = -value;
    }
    Some(value)
}

/// `base^exp` for a nonnegative exponent.
pub fn pow_u(base: &Q, exp: usize) -> Q {
    let mut acc = Q::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// `base^exp` for any integer exponent; `base` must be nonzero when `exp < 0`.
pub fn pow_i(base: &Q, exp: i32) -> Q {
    if exp >= 0 {
        pow_u(base, exp as usize)
    } else {
        pow_u(&base.recip(), exp.unsigned_abs() as usize)
    }
}

/// Exact square root when both numerator and denominator are perfect squares.
pub fn sqrt_exact(value: &Q) -> Option<Q> {
    if value.is_negative() {
        return None;
    }
    let num = value.numer();
    let den = value.denom();
    let rn = num.sqrt();
    let rd = den.sqrt();
    if &(&rn * &rn) == num && &(&rd * &rd) == den {
        Some(Q::new(rn, rd))
    } else {
        None
    }
}

/// Nearest `f64`; huge magnitudes saturate to infinity.
pub fn to_f64(value: &Q) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.numer().sign() == Sign::Minus {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A nonnegative rational or `+∞`; used for integrals of `t^{-k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extended {
    Finite(Q),
    Infinite,
}

impl Extended {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// `self <= bound`, with `∞ <= bound` always false.
    pub fn le(&self, bound: &Q) -> bool {
        match self {
            Extended::Finite(v) => v <= bound,
            Extended::Infinite => false,
        }
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}
