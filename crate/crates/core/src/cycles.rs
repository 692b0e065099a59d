//! Exact clock-cycle arithmetic.
//!
//! Latency constants like 1.5, 8.4 and 1.9 are carried as rationals so that
//! event ordering and accumulated totals never drift.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycles(Rational64);

impl Cycles {
    pub const ZERO: Cycles = Cycles(Rational64::new_raw(0, 1));

    pub fn new(numer: i64, denom: i64) -> Self {
        Cycles(Rational64::new(numer, denom))
    }

    pub fn int(v: i64) -> Self {
        Cycles(Rational64::from_integer(v))
    }

    /// Exact conversion through the shortest decimal representation of `v`,
    /// so `8.4_f64` becomes exactly 42/5.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        Self::parse_decimal(&format!("{v}"))
    }

    pub fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        if frac_part.len() > 12 {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
        let denom = 10_i64.checked_pow(frac_part.len() as u32)?;
        let numer = if neg { -numer } else { numer };
        Some(Cycles(Rational64::new(numer, denom)))
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn ceil(self) -> i64 {
        self.0.ceil().to_integer()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn rational(self) -> Rational64 {
        self.0
    }
}

impl fmt::Display for Cycles {
    /// Exact decimal when the denominator divides a power of ten, otherwise a
    /// fixed 6-digit rendering. Deterministic either way.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        let mut denom = *r.denom();
        let mut scale = 0u32;
        while denom % 10 == 0 {
            denom /= 10;
            scale += 1;
        }
        let mut twos = 0u32;
        while denom % 2 == 0 {
            denom /= 2;
            twos += 1;
        }
        let mut fives = 0u32;
        while denom % 5 == 0 {
            denom /= 5;
            fives += 1;
        }
        if denom != 1 {
            return write!(f, "{:.6}", self.to_f64());
        }
        let digits = scale + twos.max(fives);
        if digits == 0 {
            return write!(f, "{}", r.to_integer());
        }
        let pow = 10_i64.pow(digits);
        let scaled = r * Rational64::from_integer(pow);
        let v = scaled.to_integer();
        let sign = if v < 0 { "-" } else { "" };
        let v = v.abs();
        let int = v / pow;
        let mut frac = format!("{:0width$}", v % pow, width = digits as usize);
        while frac.ends_with('0') {
            frac.pop();
        }
        if frac.is_empty() {
            write!(f, "{sign}{int}")
        } else {
            write!(f, "{sign}{int}.{frac}")
        }
    }
}

impl Add for Cycles {
    type Output = Cycles;
    fn add(self, rhs: Cycles) -> Cycles {
        Cycles(self.0 + rhs.0)
    }
}

impl AddAssign for Cycles {
    fn add_assign(&mut self, rhs: Cycles) {
        self.0 += rhs.0;
    }
}

impl Sub for Cycles {
    type Output = Cycles;
    fn sub(self, rhs: Cycles) -> Cycles {
        Cycles(self.0 - rhs.0)
    }
}

impl Mul<i64> for Cycles {
    type Output = Cycles;
    fn mul(self, rhs: i64) -> Cycles {
        Cycles(self.0 * Rational64::from_integer(rhs))
    }
}

impl Sum for Cycles {
    fn sum<I: Iterator<Item = Cycles>>(iter: I) -> Cycles {
        iter.fold(Cycles::ZERO, |a, b| a + b)
    }
}

impl Serialize for Cycles {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Cycles {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Cycles::from_f64(v).ok_or_else(|| serde::de::Error::custom(format!("invalid cycle count {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_constants_are_exact() {
        assert_eq!(Cycles::from_f64(8.4).unwrap(), Cycles::new(42, 5));
        assert_eq!(Cycles::from_f64(1.9).unwrap(), Cycles::new(19, 10));
        assert_eq!(Cycles::from_f64(1.5).unwrap(), Cycles::new(3, 2));
        assert_eq!(Cycles::from_f64(3.0).unwrap(), Cycles::int(3));
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "4", "15.4", "10.5", "-2.25", "418.5"] {
            assert_eq!(Cycles::parse_decimal(s).unwrap().to_string(), s);
        }
        assert_eq!(Cycles::new(1, 3).to_string(), "0.333333");
    }

    #[test]
    fn ceil_rounds_up() {
        assert_eq!(Cycles::new(77, 5).ceil(), 16);
        assert_eq!(Cycles::int(4).ceil(), 4);
    }
}
