//! Number backends.
//!
//! Every analytic routine in this crate is generic over [`Scalar`], which is
//! implemented by [`Rational`] (exact, arbitrary precision) and by `f64`.
//! Exact results are what make constants like `4/163` reproducible bit for
//! bit; the float backend is there for speed and for the spectral closed
//! forms, which are irrational in general.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dead zone used by the float backend when deciding the sign of a mean.
pub const FAIR_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_f64(x: f64, tolerance: f64) -> Sign {
        if x > tolerance {
            Sign::Positive
        } else if x < -tolerance {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Field operations shared by the exact and floating-point backends.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// `true` when arithmetic is exact, so equality and sign tests are decisive.
    const EXACT: bool;
    /// Short backend identifier used in serialized output.
    const BACKEND: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    /// Exact zero test (no tolerance, even for floats).
    fn is_zero(&self) -> bool;

    /// Sign with the backend's dead zone: exact for rationals,
    /// [`FAIR_TOLERANCE`] for floats.
    fn sign(&self) -> Sign;

    /// Pivot quality for Gaussian elimination; `None` means unusable.
    /// Exact values prefer the smallest representation, floats the largest
    /// magnitude.
    fn pivot_rank(&self) -> Option<f64>;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc *= self.clone();
        }
        acc
    }

    /// Canonical text: `p/q` for rationals, shortest round-trip decimal for floats.
    fn to_text(&self) -> String {
        self.to_string()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: &'static str = "float";

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn sign(&self) -> Sign {
        Sign::of_f64(*self, FAIR_TOLERANCE)
    }
    fn pivot_rank(&self) -> Option<f64> {
        if *self == 0.0 || !self.is_finite() {
            None
        } else {
            Some(f64::abs(*self))
        }
    }
}

/// Exact rational number in canonical form (positive denominator, reduced).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(v: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ParseRational { text: format!("{num}/{den}"), reason: "zero denominator".into() });
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    /// The exact value of a finite double.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    /// Nearest double.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| if self.0.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    fn size_bits(&self) -> u64 {
        self.0.numer().bits() + self.0.denom().bits()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(text: &str, part: &str) -> Result<BigInt> {
    let digits = part.strip_prefix('-').unwrap_or(part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::ParseRational { text: text.to_string(), reason: format!("{part:?} is not an integer") });
    }
    BigInt::from_str(part).map_err(|e| Error::ParseRational { text: text.to_string(), reason: e.to_string() })
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `int` or `int/int`.
    fn from_str(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        match trimmed.split_once('/') {
            None => Ok(Rational(BigRational::from_integer(parse_int(text, trimmed)?))),
            Some((n, d)) => {
                let num = parse_int(text, n)?;
                let den = parse_int(text, d)?;
                if den.is_zero() {
                    return Err(Error::ParseRational { text: text.to_string(), reason: "zero denominator".into() });
                }
                Ok(Rational(BigRational::new(num, den)))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $assign_trait for Rational {
            fn $assign_method(&mut self, rhs: Rational) {
                self.0.$assign_method(rhs.0);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.0.is_zero(), "division by zero rational");
        Rational(self.0 / rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const BACKEND: &'static str = "exact";

    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(num, den)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn abs(&self) -> Self {
        Rational(self.0.abs())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn sign(&self) -> Sign {
        match self.0.cmp(&BigRational::zero()) {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
    fn pivot_rank(&self) -> Option<f64> {
        if self.0.is_zero() {
            None
        } else {
            Some(-(self.size_bits() as f64))
        }
    }
}

/// Parse a rational and convert it into any backend.
pub fn parse_scalar<S: Scalar>(text: &str) -> Result<S> {
    let r: Rational = text.parse()?;
    Ok(S::from_rational(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!("1/3".parse::<Rational>().unwrap(), Rational::new(1, 3));
        assert_eq!("2/6".parse::<Rational>().unwrap().to_string(), "1/3");
        let r: Rational = "-294/169".parse().unwrap();
        assert_eq!(r, Rational::new(-294, 169));
        assert_eq!(r.to_string(), "-294/169");
        assert_eq!("6/3".parse::<Rational>().unwrap().to_string(), "2");
        assert_eq!("3/-6".parse::<Rational>().unwrap().to_string(), "-1/2");
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "1/", "/2", "a/b", "1.5", "1/2/3", "1 /2", "--1"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} should not parse");
        }
        let err = "1/0".parse::<Rational>().unwrap_err();
        assert!(matches!(err, Error::ParseRational { ref reason, .. } if reason.contains("zero")));
    }

    #[test]
    fn float_conversion() {
        assert!((Rational::new(4, 163).to_f64() - 0.0245399).abs() < 1e-7);
        assert_eq!(Rational::zero().to_f64(), 0.0);
        // 18/709 by long division: 18 = 0 r18; 180 = 0 r180; 1800 = 2*709 r382; ...
        assert!((Rational::new(18, 709).to_f64() - 0.025388).abs() < 1e-6);
    }

    #[test]
    fn exact_f64_round_trip() {
        let x = 0.1_f64;
        let r = Rational::from_f64(x).unwrap();
        assert_ne!(r, Rational::new(1, 10));
        assert_eq!(r.to_f64(), x);
    }

    #[test]
    fn float_sign_dead_zone() {
        assert_eq!(5e-13_f64.sign(), Sign::Zero);
        assert_eq!(2e-12_f64.sign(), Sign::Positive);
        assert_eq!(Rational::new(1, 1_000_000_000_000_000).sign(), Sign::Positive);
    }

    #[test]
    fn serde_uses_text() {
        let json = serde_json::to_string(&Rational::new(-4, 6)).unwrap();
        assert_eq!(json, "\"-2/3\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Rational::new(-2, 3));
    }

    proptest! {
        #[test]
        fn float_conversion_is_additive(a in -10_000i64..10_000, b in 1i64..10_000,
                                        c in -10_000i64..10_000, d in 1i64..10_000) {
            let x = Rational::new(a, b);
            let y = Rational::new(c, d);
            let sum = (x.clone() + y.clone()).to_f64();
            let parts = x.to_f64() + y.to_f64();
            prop_assert!((sum - parts).abs() <= 1e-12 * sum.abs().max(1.0));
        }

        #[test]
        fn rendering_round_trips(a in any::<i64>(), b in 1i64..i64::MAX) {
            let x = Rational::new(a, b);
            let again: Rational = x.to_string().parse().unwrap();
            prop_assert_eq!(&again, &x);
            prop_assert_eq!(again.to_string(), x.to_string());
        }
    }
}
