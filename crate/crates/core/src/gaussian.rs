//! Gaussian rationals `a + b i` with `a, b` exact rationals.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, parse_rational, Rational};

/// Ordered lexicographically by `(re, im)` so eigenvalue multisets have a
/// canonical sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self::new(re, Rational::zero())
    }

    pub fn from_int(value: i64) -> Self {
        Self::real(int(value))
    }

    pub fn i() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(&self.re * k, &self.im * k)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            None
        } else {
            Some(Self::new(&self.re / &n, -&self.im / &n))
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Accepts `a`, `a+b i`, `a-b i`, `b i`, `i`, `-i`; spaces are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty Gaussian rational".into()));
        }
        let Some(body) = s.strip_suffix('i') else {
            return Ok(Self::real(parse_rational(&s)?));
        };
        let split = body
            .char_indices()
            .filter(|&(idx, c)| idx > 0 && (c == '+' || c == '-'))
            .map(|(idx, _)| idx)
            .next_back();
        let (re, im) = match split {
            Some(idx) => (parse_rational(&body[..idx])?, &body[idx..]),
            None => (Rational::zero(), body),
        };
        let im = match im.trim_start_matches('+') {
            "" => Rational::one(),
            "-" => -Rational::one(),
            other => parse_rational(other)?,
        };
        Ok(Self::new(re, im))
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return f.write_str(&format_rational(&self.re));
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{} i",
            format_rational(&self.re),
            sign,
            format_rational(&self.im.abs())
        )
    }
}

impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Self::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl From<Rational> for GaussianRational {
    fn from(re: Rational) -> Self {
        Self::real(re)
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::real(Rational::one())
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl<'a> Div<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        let inv = rhs.inv().expect("division by zero Gaussian rational");
        self * &inv
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-&self.re, -&self.im)
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr<GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: GaussianRational) -> GaussianRational {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &GaussianRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn g(re: (i64, i64), im: (i64, i64)) -> GaussianRational {
        GaussianRational::new(rat(re.0, re.1), rat(im.0, im.1))
    }

    #[test]
    fn parse_forms() {
        assert_eq!(
            GaussianRational::parse("1/4+1 i").unwrap(),
            g((1, 4), (1, 1))
        );
        assert_eq!(
            GaussianRational::parse("1/2-3/2 i").unwrap(),
            g((1, 2), (-3, 2))
        );
        assert_eq!(GaussianRational::parse("4i").unwrap(), g((0, 1), (4, 1)));
        assert_eq!(GaussianRational::parse("-i").unwrap(), g((0, 1), (-1, 1)));
        assert_eq!(
            GaussianRational::parse("-1/3+i").unwrap(),
            g((-1, 3), (1, 1))
        );
        assert_eq!(GaussianRational::parse("-7/2").unwrap(), g((-7, 2), (0, 1)));
        assert!(GaussianRational::parse("1/2+x i").is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["0", "-7/2", "1/2+2 i", "0-1 i", "3/4-1/5 i"] {
            let z = GaussianRational::parse(text).unwrap();
            assert_eq!(z.to_string(), text);
            assert_eq!(GaussianRational::parse(&z.to_string()).unwrap(), z);
        }
    }

    #[test]
    fn field_ops() {
        let a = g((1, 2), (1, 1));
        let b = g((-1, 3), (2, 5));
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(&a * &a.inv().unwrap(), GaussianRational::one());
        assert_eq!(GaussianRational::i().pow(2), GaussianRational::from_int(-1));
        assert!(GaussianRational::zero().inv().is_none());
    }
}
