//! Exact decimal fixed-point values with a resolution of 10^-6.
//!
//! Every heuristic value, terminal evaluation and adaptive evaluation in the
//! crate is a [`FixedPoint`], so that the lexicographic comparisons made by the
//! selectors are total and identical on every platform.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of raw units in `1.0`.
pub const SCALE: i64 = 1_000_000;

/// Maximum number of fractional digits accepted by the decimal parser.
pub const FRACTION_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseFixedError {
    #[error("empty decimal")]
    Empty,
    #[error("invalid decimal `{0}`")]
    Invalid(String),
    #[error("decimal `{0}` has more than 6 fractional digits")]
    TooPrecise(String),
    #[error("decimal `{0}` is out of range")]
    OutOfRange(String),
}

/// A value `raw / 10^6`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FixedPoint(i64);

impl FixedPoint {
    pub const ZERO: FixedPoint = FixedPoint(0);
    pub const ONE: FixedPoint = FixedPoint(SCALE);
    /// The smallest positive value, `10^-6`.
    pub const EPSILON: FixedPoint = FixedPoint(1);

    pub const fn from_raw(raw: i64) -> Self {
        FixedPoint(raw)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    pub const fn from_int(value: i64) -> Self {
        FixedPoint(value * SCALE)
    }

    pub fn checked_add(self, other: Self) -> Option<Self> {
        self.0.checked_add(other.0).map(FixedPoint)
    }

    pub fn checked_mul_int(self, k: i64) -> Option<Self> {
        self.0.checked_mul(k).map(FixedPoint)
    }

    /// Lossy conversion, for display and plotting only.
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }
}

impl Add for FixedPoint {
    type Output = FixedPoint;
    fn add(self, rhs: Self) -> Self {
        FixedPoint(self.0 + rhs.0)
    }
}

impl Sub for FixedPoint {
    type Output = FixedPoint;
    fn sub(self, rhs: Self) -> Self {
        FixedPoint(self.0 - rhs.0)
    }
}

impl Neg for FixedPoint {
    type Output = FixedPoint;
    fn neg(self) -> Self {
        FixedPoint(-self.0)
    }
}

impl Mul<i64> for FixedPoint {
    type Output = FixedPoint;
    fn mul(self, rhs: i64) -> Self {
        FixedPoint(self.0 * rhs)
    }
}

impl From<i8> for FixedPoint {
    fn from(value: i8) -> Self {
        FixedPoint::from_int(value as i64)
    }
}

impl fmt::Display for FixedPoint {
    /// Shortest exact decimal form, always with at least one fractional digit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / SCALE as u64;
        let frac = abs % SCALE as u64;
        if frac == 0 {
            return write!(f, "{sign}{int}.0");
        }
        let digits = format!("{frac:06}");
        write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
    }
}

impl fmt::Debug for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for FixedPoint {
    type Err = ParseFixedError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if text.is_empty() {
            return Err(ParseFixedError::Empty);
        }
        let invalid = || ParseFixedError::Invalid(text.to_string());
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let mut frac_raw: i64 = 0;
        if let Some(frac) = frac_part {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(invalid());
            }
            if frac.len() > FRACTION_DIGITS {
                return Err(ParseFixedError::TooPrecise(text.to_string()));
            }
            let padded = format!("{frac:0<6}");
            frac_raw = padded.parse().map_err(|_| invalid())?;
        }
        let out_of_range = || ParseFixedError::OutOfRange(text.to_string());
        let int: i64 = int_part.parse().map_err(|_| out_of_range())?;
        let magnitude = int
            .checked_mul(SCALE)
            .and_then(|v| v.checked_add(frac_raw))
            .ok_or_else(out_of_range)?;
        Ok(FixedPoint(if negative { -magnitude } else { magnitude }))
    }
}

impl Serialize for FixedPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // arbitrary_precision keeps the decimal text verbatim.
        let number: serde_json::Number = self
            .to_string()
            .parse()
            .map_err(serde::ser::Error::custom)?;
        number.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FixedPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let number = serde_json::Number::deserialize(deserializer)?;
        number
            .to_string()
            .parse()
            .map_err(serde::de::Error::custom)
    }
}
