//! Scalar abstraction for transition probabilities.
//!
//! Everything numeric in the crate (models, value vectors, path masses) is
//! generic over [`Probability`]. Floating point types compare with a small
//! tolerance; [`BigRational`] compares exactly.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// A scalar usable as a transition probability.
pub trait Probability:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Tolerance used when checking that a distribution sums to one.
    fn mass_tolerance() -> Self;

    /// Two values closer than this are treated as a tie during optimisation.
    fn tie_tolerance() -> Self;

    /// Parses `0.25`, `1`, `1e-3` or `1/4`.
    fn parse(text: &str) -> Option<Self>;

    fn from_f64(value: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Text that [`Probability::parse`] maps back to the same value.
    fn to_exact_string(&self) -> String {
        self.to_string()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `|self - other| <= tol`
    fn within(&self, other: &Self, tol: &Self) -> bool {
        let diff = if self > other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        };
        diff <= *tol
    }
}

fn parse_float_fraction(text: &str) -> Option<f64> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            if d == 0.0 {
                None
            } else {
                Some(n / d)
            }
        }
        None => text.parse().ok(),
    }
}

impl Probability for f64 {
    fn mass_tolerance() -> Self {
        1e-9
    }

    fn tie_tolerance() -> Self {
        1e-12
    }

    fn parse(text: &str) -> Option<Self> {
        parse_float_fraction(text).filter(|v| v.is_finite())
    }

    fn from_f64(value: f64) -> Option<Self> {
        value.is_finite().then_some(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Probability for f32 {
    fn mass_tolerance() -> Self {
        1e-6
    }

    fn tie_tolerance() -> Self {
        1e-7
    }

    fn parse(text: &str) -> Option<Self> {
        parse_float_fraction(text)
            .map(|v| v as f32)
            .filter(|v| v.is_finite())
    }

    fn from_f64(value: f64) -> Option<Self> {
        let v = value as f32;
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

/// Parses a plain decimal literal (optionally with an exponent) exactly.
fn parse_decimal_exact(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

impl Probability for BigRational {
    fn mass_tolerance() -> Self {
        BigRational::zero()
    }

    fn tie_tolerance() -> Self {
        BigRational::zero()
    }

    fn parse(text: &str) -> Option<Self> {
        match text.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().ok()?;
                let d: BigInt = d.trim().parse().ok()?;
                if d.is_zero() {
                    None
                } else {
                    Some(BigRational::new(n, d))
                }
            }
            None => parse_decimal_exact(text),
        }
    }

    fn from_f64(value: f64) -> Option<Self> {
        BigRational::from_float(value)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_exact_string(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}
