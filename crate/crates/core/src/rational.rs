//! Exact rational numbers and their textual forms.
//!
//! Probabilities and constants are `BigRational`s: always in lowest terms with
//! a positive denominator. Literals are either `p/q`, an integer, or a finite
//! decimal expansion (`0.4` is exactly `2/5`).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{literal}`: {reason}")]
pub struct RationalError {
    pub literal: String,
    pub reason: &'static str,
}

fn err(literal: &str, reason: &'static str) -> RationalError {
    RationalError {
        literal: literal.to_string(),
        reason,
    }
}

fn parse_digits(literal: &str, digits: &str) -> Result<BigInt, RationalError> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(literal, "expected decimal digits"));
    }
    digits
        .parse::<BigInt>()
        .map_err(|_| err(literal, "expected decimal digits"))
}

/// Parses `p/q`, `n`, or a finite decimal such as `0.125`, with an optional
/// leading sign.
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let literal = text.trim();
    let (negative, body) = match literal.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, literal.strip_prefix('+').unwrap_or(literal)),
    };
    let value = if let Some((num, den)) = body.split_once('/') {
        let num = parse_digits(literal, num)?;
        let den = parse_digits(literal, den)?;
        if den.is_zero() {
            return Err(err(literal, "zero denominator"));
        }
        Rational::new(num, den)
    } else if let Some((int, frac)) = body.split_once('.') {
        if int.is_empty() && frac.is_empty() {
            return Err(err(literal, "expected decimal digits"));
        }
        let int = if int.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(literal, int)?
        };
        let frac_value = if frac.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(literal, frac)?
        };
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        Rational::new(int * &scale + frac_value, scale)
    } else {
        Rational::from_integer(parse_digits(literal, body)?)
    };
    Ok(if negative { -value } else { value })
}

/// Canonical `p/q` form; integers print without a denominator.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Human-oriented rendering with six significant digits. Presentation only.
pub fn format_decimal(value: &Rational) -> String {
    match value.to_f64() {
        Some(x) if x == 0.0 => "0".to_string(),
        Some(x) => {
            let magnitude = x.abs().log10().floor() as i32;
            let decimals = (5 - magnitude).max(0) as usize;
            let text = format!("{:.*}", decimals, x);
            if text.contains('.') {
                text.trim_end_matches('0').trim_end_matches('.').to_string()
            } else {
                text
            }
        }
        None => format_rational(value),
    }
}

/// Number of bits needed to write down `value`; used to rank pivots.
pub fn bit_size(value: &Rational) -> u64 {
    value.numer().bits() + value.denom().bits()
}

pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && *value <= Rational::one()
}

/// `ceil(value * 2^64)` clamped to `u64`, for `value` in `[0, 1]`.
///
/// Returns `None` when the scaled value is `2^64` or more, i.e. the threshold
/// is never reached by a uniform 64-bit draw.
pub(crate) fn scaled_u64_threshold(value: &Rational) -> Option<u64> {
    let scaled = value * Rational::from_integer(BigInt::one() << 64u32);
    let (quot, rem) = scaled.numer().div_rem(scaled.denom());
    let ceil = if rem.is_zero() { quot } else { quot + 1 };
    ceil.to_u64()
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}
