//! Exact rational scalar used for every distance, dual value and cost share.
//!
//! Tie events (equal merging distances, simultaneous moat collisions) decide
//! which branch a solver takes, so lengths are never floats. `i128` components
//! give ample headroom at the instance sizes the oracles accept.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational length. Displayed as `p/q` (or `p` when integral).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// `num/den`; panics on a zero denominator.
    pub fn new(num: i128, den: i128) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn from_int(n: i128) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Integer power, with negative exponents allowed.
    pub fn pow(self, exp: i32) -> Self {
        Rational(self.0.pow(exp))
    }

    /// Smallest integer `i` with `base^i >= self`, i.e. `ceil(log_base(self))`
    /// computed exactly. Requires `self > 0` and `base >= 2`.
    pub fn ceil_log(&self, base: u32) -> Option<i64> {
        if self.0 <= Ratio::zero() || base < 2 {
            return None;
        }
        let base = Rational::from_int(base as i128);
        let mut i: i64 = 0;
        let mut p = Rational::ONE;
        if p >= *self {
            // self <= 1: walk downward until base^i < self.
            while p >= *self {
                i -= 1;
                p = p / base;
            }
            return Some(i + 1);
        }
        while p < *self {
            i += 1;
            p = p * base;
        }
        Some(i)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom() == &1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Accepts `p/q`, an integer, or a decimal literal such as `2.1`.
impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError(s.to_owned()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: i128 = num.trim().parse().map_err(|_| ParseRationalError(s.to_owned()))?;
            let den: i128 = den.trim().parse().map_err(|_| ParseRationalError(s.to_owned()))?;
            if den == 0 {
                return Err(ParseRationalError(s.to_owned()));
            }
            return Ok(Rational::new(num, den));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let negative = int_part.trim_start().starts_with('-');
            let int: i128 = if int_part == "-" || int_part.is_empty() {
                0
            } else {
                int_part.parse().map_err(|_| ParseRationalError(s.to_owned()))?
            };
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseRationalError(s.to_owned()));
            }
            let scale = 10i128
                .checked_pow(frac_part.len() as u32)
                .ok_or_else(|| ParseRationalError(s.to_owned()))?;
            let frac: i128 = frac_part.parse().map_err(|_| ParseRationalError(s.to_owned()))?;
            let magnitude = Rational::from_int(int.abs()) + Rational::new(frac, scale);
            return Ok(if negative { -magnitude } else { magnitude });
        }
        let n: i128 = s.parse().map_err(|_| ParseRationalError(s.to_owned()))?;
        Ok(Rational::from_int(n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Rational;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as `p/q`, decimal string, or integer")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_int(v as i128))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from_int(v as i128))
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Rational, E> {
                Ratio::<i128>::approximate_float(v)
                    .map(Rational)
                    .ok_or_else(|| E::custom("float not representable"))
            }
        }
        deserializer.deserialize_any(V)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl From<i128> for Rational {
    fn from(n: i128) -> Self {
        Rational::from_int(n)
    }
}

impl From<u32> for Rational {
    fn from(n: u32) -> Self {
        Rational::from_int(n as i128)
    }
}

/// `base^exp` as a rational, for integer `base >= 1` and any integer `exp`.
pub fn int_pow(base: u32, exp: i64) -> Rational {
    let b = Rational::from_int(base as i128);
    if exp >= 0 {
        let mut p = Rational::ONE;
        for _ in 0..exp {
            p = p * b;
        }
        p
    } else {
        let mut p = Rational::ONE;
        for _ in 0..(-exp) {
            p = p / b;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!("3".parse::<Rational>().unwrap(), Rational::from_int(3));
        assert_eq!("21/10".parse::<Rational>().unwrap(), Rational::new(21, 10));
        assert_eq!("2.1".parse::<Rational>().unwrap(), Rational::new(21, 10));
        assert_eq!("-0.5".parse::<Rational>().unwrap(), Rational::new(-1, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn ceil_log_matches_hand_values() {
        // level(s) = ceil(log_c d): d=5, c=2 -> 3; d=4 -> 2; d=1 -> 0.
        assert_eq!(Rational::from_int(5).ceil_log(2), Some(3));
        assert_eq!(Rational::from_int(4).ceil_log(2), Some(2));
        assert_eq!(Rational::ONE.ceil_log(2), Some(0));
        assert_eq!(Rational::new(1, 3).ceil_log(2), Some(-1));
        assert_eq!(Rational::ZERO.ceil_log(2), None);
    }

    #[test]
    fn display_roundtrip() {
        for r in [Rational::new(21, 10), Rational::from_int(-7), Rational::new(-3, 4)] {
            assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
        }
    }
}
