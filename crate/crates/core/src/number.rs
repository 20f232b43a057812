//! Exact-or-floating scalars used by polynomial evaluation and witnesses.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational; the exact scalar throughout the crate.
pub type Rational = BigRational;

/// A scalar that is either an exact rational or an `f64`.
///
/// Arithmetic between two exact values stays exact; anything touching a
/// float becomes a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn zero() -> Self {
        Number::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Number::Exact(Rational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Number::Exact(Rational::from_integer(BigInt::from(v)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => rational_to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(r) => r.is_zero(),
            Number::Float(x) => *x == 0.0,
        }
    }

    pub fn abs(&self) -> Number {
        match self {
            Number::Exact(r) => Number::Exact(r.abs()),
            Number::Float(x) => Number::Float(x.abs()),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Number::Exact(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Number::Float(x) => {
                if *x > 0.0 {
                    1
                } else if *x < 0.0 {
                    -1
                } else {
                    0
                }
            }
        }
    }

    /// Square root of a nonnegative value, exact when the value is the
    /// square of a rational.
    pub fn sqrt(&self) -> Number {
        match self {
            Number::Exact(r) => match rational_sqrt(r) {
                Some(s) => Number::Exact(s),
                None => Number::Float(rational_to_f64(r).sqrt()),
            },
            Number::Float(x) => Number::Float(x.sqrt()),
        }
    }

    pub fn recip(&self) -> Number {
        match self {
            Number::Exact(r) => Number::Exact(r.recip()),
            Number::Float(x) => Number::Float(1.0 / x),
        }
    }

    pub fn pow(&self, e: u32) -> Number {
        let mut acc = Number::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl From<Rational> for Number {
    fn from(r: Rational) -> Self {
        Number::Exact(r)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Float(x)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Float(x) => write!(f, "{x:e}"),
        }
    }
}

macro_rules! number_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Number> for &Number {
            type Output = Number;
            fn $method(self, rhs: &Number) -> Number {
                match (self, rhs) {
                    (Number::Exact(a), Number::Exact(b)) => Number::Exact(a $op b),
                    _ => Number::Float(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $trait for Number {
            type Output = Number;
            fn $method(self, rhs: Number) -> Number {
                &self $op &rhs
            }
        }
    };
}

number_binop!(Add, add, +);
number_binop!(Sub, sub, -);
number_binop!(Mul, mul, *);
number_binop!(Div, div, /);

impl Neg for Number {
    type Output = Number;
    fn neg(self) -> Number {
        match self {
            Number::Exact(r) => Number::Exact(-r),
            Number::Float(x) => Number::Float(-x),
        }
    }
}

/// Nearest `f64` of a big rational, robust to numerators and denominators
/// that overflow `f64` on their own.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let shift = r.numer().bits() as i64 - r.denom().bits() as i64 - 60;
    let scaled = if shift >= 0 {
        r / Rational::from_integer(BigInt::one() << shift as usize)
    } else {
        r * Rational::from_integer(BigInt::one() << (-shift) as usize)
    };
    let q = scaled.to_integer().to_f64().unwrap_or(f64::NAN);
    q * 2f64.powi(shift as i32)
}

/// Exact square root when `r` is the square of a rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, a bare integer, or a decimal like `0.25` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().ok()? };
        let frac: BigInt = fp.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = Rational::new(whole * &scale + frac, scale);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sqrt() {
        assert_eq!(rational_sqrt(&rational(9, 16)), Some(rational(3, 4)));
        assert_eq!(rational_sqrt(&rational(2, 1)), None);
        assert_eq!(rational_sqrt(&rational(-1, 4)), None);
        assert!(Number::Exact(rational(15, 16)).sqrt().to_f64() - 15f64.sqrt() / 4.0 < 1e-15);
    }

    #[test]
    fn mixed_arithmetic_degrades_to_float() {
        let a = Number::Exact(rational(1, 2));
        let b = Number::Float(0.25);
        assert_eq!(&a * &b, Number::Float(0.125));
        assert_eq!(&a + &a, Number::one());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/4"), Some(rational(3, 4)));
        assert_eq!(parse_rational("-2"), Some(int(-2)));
        assert_eq!(parse_rational("-0.25"), Some(rational(-1, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = Rational::from_integer(BigInt::one() << 2000usize);
        let r = &big / (&big * int(3));
        assert!((rational_to_f64(&r) - 1.0 / 3.0).abs() < 1e-15);
    }
}
