//! Exact rational time and score values.
//!
//! Every timestamp and every metric value in this crate is an exact rational.
//! Auto-aligned evaluation matches events only when their remapped times are
//! identical, and remapping interpolates between anchors, so floating point
//! is not an option here.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for metric values and ratios.
pub type Rational = BigRational;

/// Build a rational from an integer numerator and denominator.
///
/// Panics if `denom` is zero.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Lossy conversion for display and FFI.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Render a rational as `p` or `p/q`.
pub fn format_exact(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Render with `places` decimals, rounding half away from zero.
pub fn format_decimal(value: &Rational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = (value * Rational::from_integer(scale.clone())).round().to_integer();
    let negative = scaled.is_negative();
    let magnitude = scaled.abs();
    let whole = &magnitude / &scale;
    let frac = &magnitude % &scale;
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{:0>width$}", frac.to_string(), width = places as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational value `{0}`")]
pub struct ParseRationalError(pub String);

/// Parse `p`, `p/q`, or a finite decimal such as `0.6` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let text = text.trim();
    if let Some((numer, denom)) = text.split_once('/') {
        let numer: BigInt = numer.trim().parse().map_err(|_| err())?;
        let denom: BigInt = denom.trim().parse().map_err(|_| err())?;
        if denom.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(numer, denom));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{whole_digits}{frac}");
        let mut numer: BigInt = digits.parse().map_err(|_| err())?;
        if negative {
            numer = -numer;
        }
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Rational::new(numer, denom));
    }
    let value: BigInt = text.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(value))
}

/// A point on a score timeline.
///
/// Units are nominal milliseconds (one quarter note = 1000 units for scores
/// converted from notation). Values are exact rationals.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(Rational);

impl Time {
    pub fn zero() -> Self {
        Time(Rational::zero())
    }

    pub fn from_millis(ms: i64) -> Self {
        Time(int(ms))
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Time(ratio(numer, denom))
    }

    pub fn from_rational(value: Rational) -> Self {
        Time(value)
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Absolute difference between two times, as a duration.
    pub fn abs_diff(&self, other: &Time) -> Time {
        Time((&self.0 - &other.0).abs())
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Time({})", format_exact(&self.0))
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_exact(&self.0))
    }
}

impl FromStr for Time {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Time)
    }
}

impl From<i64> for Time {
    fn from(ms: i64) -> Self {
        Time::from_millis(ms)
    }
}

impl Add for &Time {
    type Output = Time;
    fn add(self, rhs: &Time) -> Time {
        Time(&self.0 + &rhs.0)
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl Sub for &Time {
    type Output = Time;
    fn sub(self, rhs: &Time) -> Time {
        Time(&self.0 - &rhs.0)
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl Neg for Time {
    type Output = Time;
    fn neg(self) -> Time {
        Time(-self.0)
    }
}

impl Mul<&Rational> for &Time {
    type Output = Time;
    fn mul(self, rhs: &Rational) -> Time {
        Time(&self.0 * rhs)
    }
}

impl Div<&Rational> for &Time {
    type Output = Time;
    fn div(self, rhs: &Rational) -> Time {
        Time(&self.0 / rhs)
    }
}

/// Ratio of two durations. Panics if `rhs` is zero.
impl Div for &Time {
    type Output = Rational;
    fn div(self, rhs: &Time) -> Rational {
        &self.0 / &rhs.0
    }
}

/// Harmonic mean of precision and recall from raw counts.
///
/// Returns 1 when there is nothing to find and nothing was reported.
pub fn f_measure(tp: usize, fp: usize, fn_: usize) -> Rational {
    if tp == 0 && fp == 0 && fn_ == 0 {
        return Rational::one();
    }
    let denom = 2 * tp + fp + fn_;
    ratio(2 * tp as i64, denom as i64)
}
