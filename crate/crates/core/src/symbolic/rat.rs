//! Exact rational scalars and small helpers shared across the analysis.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number; all analysis arithmetic is performed over these.
pub type Rat = BigRational;

/// Sign of an exact quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    /// Sign of a rational.
    pub fn of(value: &Rat) -> Sign {
        if value.is_zero() {
            Sign::Zero
        } else if value.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    /// Flips positive and negative, fixes zero.
    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// Builds the rational `numer / denom`. Panics if `denom` is zero.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Builds the integer rational `value`.
pub fn rint(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

/// Raises a rational to a non-negative integer power.
pub fn rat_pow(base: &Rat, exp: u32) -> Rat {
    if exp == 0 {
        return Rat::one();
    }
    if exp == 1 {
        return base.clone();
    }
    // Powers of a reduced fraction are reduced: coprimality survives
    // exponentiation, so skipping the constructor's gcd is exact.
    let numer = base.numer().pow(exp);
    let denom = base.denom().pow(exp);
    Rat::new_raw(numer, denom)
}

/// Parses a rational literal: an integer (`3`), a fraction (`3/4`), or a
/// decimal (`0.25`), each with an optional leading sign. Returns `None` for
/// malformed input or a zero denominator.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let value = if let Some((numer, denom)) = body.split_once('/') {
        let numer: BigInt = numer.parse().ok()?;
        let denom: BigInt = denom.parse().ok()?;
        if denom.is_zero() {
            return None;
        }
        Rat::new(numer, denom)
    } else if let Some((whole, frac)) = body.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let whole: BigInt = if whole.is_empty() { BigInt::zero() } else { whole.parse().ok()? };
        let digits: BigInt = frac.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        Rat::from_integer(whole) + Rat::new(digits, scale)
    } else {
        let numer: BigInt = body.parse().ok()?;
        Rat::from_integer(numer)
    };
    Some(if negative { -value } else { value })
}

/// Number of bits in the larger of numerator and denominator; used by the
/// simulator to detect runaway magnitudes.
pub fn bit_size(value: &Rat) -> u64 {
    value.numer().bits().max(value.denom().bits())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integer_fraction_and_decimal_literals() {
        assert_eq!(parse_rat("3").unwrap(), rint(3));
        assert_eq!(parse_rat("-7").unwrap(), rint(-7));
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-2.5").unwrap(), rat(-5, 2));
        assert_eq!(parse_rat("1.0").unwrap(), rint(1));
    }

    #[test]
    fn rejects_malformed_literals() {
        assert!(parse_rat("").is_none());
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("1.").is_none());
        assert!(parse_rat("one").is_none());
        assert!(parse_rat("1/2/3").is_none());
    }

    #[test]
    fn integer_powers_are_exact() {
        assert_eq!(rat_pow(&rat(2, 3), 3), rat(8, 27));
        assert_eq!(rat_pow(&rat(-5, 2), 0), rint(1));
        assert_eq!(rat_pow(&rint(0), 4), rint(0));
    }
}
