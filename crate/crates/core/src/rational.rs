//! Exact rationals and the handful of helpers the rest of the crate needs.
//!
//! Rationals travel as strings `"p/q"` (or `"p"` for integers), always in
//! lowest terms with a positive denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Largest integer not exceeding `q`.
pub fn floor(q: &Rational) -> BigInt {
    q.numer().div_floor(q.denom())
}

pub fn floor_i64(q: &Rational) -> i64 {
    floor(q)
        .to_i64()
        .expect("floor of a rational in this crate fits in i64")
}

/// `q - floor(q)`, always in `[0, 1)`.
pub fn frac(q: &Rational) -> Rational {
    q - Rational::from_integer(floor(q))
}

pub fn is_unit_interval(q: &Rational) -> bool {
    !q.is_negative() && q < &Rational::one()
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a rational of the form p/q"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("`{text}` has a zero denominator")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `p/q` in lowest terms, or `p` for integers.
pub fn format_rational(q: &Rational) -> String {
    // BigRational is kept reduced with a positive denominator.
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub mod serde_rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_and_frac_of_negatives() {
        assert_eq!(floor(&rat(-1, 2)), BigInt::from(-1));
        assert_eq!(frac(&rat(-1, 2)), rat(1, 2));
        assert_eq!(floor(&rat(7, 3)), BigInt::from(2));
        assert_eq!(frac(&int(-3)), int(0));
    }

    #[test]
    fn parse_is_canonical() {
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("3/-6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(" -5 ").unwrap(), int(-5));
        assert_eq!(format_rational(&parse_rational("6/-4").unwrap()), "-3/2");
        assert_eq!(format_rational(&int(7)), "7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("").is_err());
    }
}
