//! Exact rational helpers shared by the solver and the certification layer.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `7`, `-2`, `1.252`, `3/4`, `1e-4` or `2.5E3` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| err())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fractional) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && fractional.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(fractional.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{whole}{fractional}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| err())?);
    let shift = exponent - fractional.len() as i32;
    let ten = int(10);
    if shift >= 0 {
        value *= num_traits::pow(ten, shift as usize);
    } else {
        value /= num_traits::pow(ten, (-shift) as usize);
    }
    Ok(if negative { -value } else { value })
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `a/b` (or just `a` for integers), the wire form used in files and JSON.
pub fn to_wire(r: &Rational) -> String {
    r.to_string()
}

/// Exact form followed by a decimal approximation, for human-readable output.
pub fn describe(r: &Rational) -> String {
    if r.is_integer() {
        r.to_string()
    } else {
        format!("{} (~{:.6})", r, to_f64(r))
    }
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

pub fn sum<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> Rational {
    items.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}

pub fn one() -> Rational {
    Rational::one()
}

/// Vertex penalty; the root carries the distinguished infinite value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Penalty {
    Finite(Rational),
    Infinite,
}

impl Penalty {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Penalty::Infinite)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Penalty::Finite(r) => Some(r),
            Penalty::Infinite => None,
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::Finite(r) => write!(f, "{r}"),
            Penalty::Infinite => f.write_str("inf"),
        }
    }
}
