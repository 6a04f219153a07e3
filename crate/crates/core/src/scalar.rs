//! Numeric scalar used by the metric and statistics code.
//!
//! Metric arithmetic is written once against [`Scalar`] and instantiated for
//! `f64` (the default everywhere), `f32`, and the exact [`Rational`] type.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Exact rational scalar.
pub type Rational = Ratio<i64>;

pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// `num / den`. `den` must be non-zero.
    fn ratio(num: i64, den: i64) -> Self {
        debug_assert!(den != 0, "ratio with zero denominator");
        Self::from_int(num) / Self::from_int(den)
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable in scalar")
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    /// Clamps into `[0, 1]`. NaN passes through so outlier scans can see it.
    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }

    fn in_unit_interval(self) -> bool {
        self >= Self::zero() && self <= Self::one()
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses a plain decimal literal such as `0.7` or `1` exactly as
    /// `digits / 10^scale`, so rational scalars receive the intended value.
    fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        if frac_part.len() > 12 {
            return None;
        }
        let digits: String = format!("{int_part}{frac_part}");
        let mut num: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
        if negative {
            num = -num;
        }
        Some(Self::ratio(num, 10i64.checked_pow(frac_part.len() as u32)?))
    }
}

impl Scalar for f32 {}

impl Scalar for f64 {}

impl Scalar for Rational {}
