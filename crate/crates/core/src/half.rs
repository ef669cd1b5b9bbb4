//! Exact half-integer indices.
//!
//! Indices of line-field singularities live in ½ℤ. They are stored as the
//! doubled integer so that all arithmetic stays exact.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A value in ½ℤ, stored as `doubled = 2 * value`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfIndex {
    doubled: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot read `{0}` as a half-integer (expected `p/2`, `p`, or a decimal ending in .0/.5)")]
pub struct HalfIndexParseError(pub String);

impl HalfIndex {
    pub const ZERO: HalfIndex = HalfIndex { doubled: 0 };
    pub const ONE: HalfIndex = HalfIndex { doubled: 2 };

    pub const fn from_doubled(doubled: i64) -> Self {
        HalfIndex { doubled }
    }

    pub const fn from_int(value: i64) -> Self {
        HalfIndex { doubled: 2 * value }
    }

    pub const fn doubled(self) -> i64 {
        self.doubled
    }

    /// True when the value is an integer.
    pub const fn is_integral(self) -> bool {
        self.doubled % 2 == 0
    }

    /// The integer value, if there is one.
    pub fn as_int(self) -> Option<i64> {
        self.is_integral().then_some(self.doubled / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.doubled as f64 / 2.0
    }

    /// `2 * self`, always an integer.
    pub const fn twice(self) -> i64 {
        self.doubled
    }

    /// Exact machine form `"<doubled>/2"`.
    pub fn to_fraction_string(self) -> String {
        format!("{}/2", self.doubled)
    }
}

impl fmt::Display for HalfIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integral() {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

impl FromStr for HalfIndex {
    type Err = HalfIndexParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || HalfIndexParseError(s.to_string());
        if let Some((num, den)) = t.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| err())?;
            return match den.trim() {
                "1" => Ok(HalfIndex::from_int(num)),
                "2" => Ok(HalfIndex::from_doubled(num)),
                _ => Err(err()),
            };
        }
        if let Ok(v) = t.parse::<i64>() {
            return Ok(HalfIndex::from_int(v));
        }
        let v: f64 = t.parse().map_err(|_| err())?;
        let d = 2.0 * v;
        if d.is_finite() && d == d.round() && d.abs() < 1e15 {
            Ok(HalfIndex::from_doubled(d as i64))
        } else {
            Err(err())
        }
    }
}

impl Add for HalfIndex {
    type Output = HalfIndex;
    fn add(self, rhs: HalfIndex) -> HalfIndex {
        HalfIndex::from_doubled(self.doubled + rhs.doubled)
    }
}

impl AddAssign for HalfIndex {
    fn add_assign(&mut self, rhs: HalfIndex) {
        self.doubled += rhs.doubled;
    }
}

impl Sub for HalfIndex {
    type Output = HalfIndex;
    fn sub(self, rhs: HalfIndex) -> HalfIndex {
        HalfIndex::from_doubled(self.doubled - rhs.doubled)
    }
}

impl Neg for HalfIndex {
    type Output = HalfIndex;
    fn neg(self) -> HalfIndex {
        HalfIndex::from_doubled(-self.doubled)
    }
}

impl Sum for HalfIndex {
    fn sum<I: Iterator<Item = HalfIndex>>(iter: I) -> HalfIndex {
        iter.fold(HalfIndex::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a HalfIndex> for HalfIndex {
    fn sum<I: Iterator<Item = &'a HalfIndex>>(iter: I) -> HalfIndex {
        iter.copied().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("3/2".parse::<HalfIndex>().unwrap().doubled(), 3);
        assert_eq!("-1/2".parse::<HalfIndex>().unwrap().doubled(), -1);
        assert_eq!("-4/2".parse::<HalfIndex>().unwrap(), HalfIndex::from_int(-2));
        assert_eq!("1".parse::<HalfIndex>().unwrap(), HalfIndex::ONE);
        assert_eq!("0.5".parse::<HalfIndex>().unwrap().doubled(), 1);
        assert!("1/3".parse::<HalfIndex>().is_err());
        assert!("0.25".parse::<HalfIndex>().is_err());
        assert!("x".parse::<HalfIndex>().is_err());
    }

    #[test]
    fn display_and_integrality() {
        assert_eq!(HalfIndex::from_doubled(-1).to_string(), "-1/2");
        assert_eq!(HalfIndex::from_doubled(-4).to_string(), "-2");
        assert_eq!(HalfIndex::from_doubled(-4).to_fraction_string(), "-4/2");
        assert!(HalfIndex::from_doubled(6).is_integral());
        assert_eq!(HalfIndex::from_doubled(7).as_int(), None);
        let s: HalfIndex = [1, 1, 1].iter().map(|&d| HalfIndex::from_doubled(d)).sum();
        assert_eq!(s.doubled(), 3);
    }
}
