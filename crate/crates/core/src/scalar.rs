//! Numeric abstraction shared by action costs and plan distances.
//!
//! Everything cost- or distance-valued in the crate is generic over [`Scalar`],
//! so the same code runs on `f32`/`f64` or on exact rationals. The crate root
//! exposes concrete aliases for the common choices.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive, Zero};

pub trait Scalar: Num + Clone + PartialOrd + Debug + Display + Send + Sync + Sum + 'static {
    /// Build `numer / denom`. `denom` must be non-zero.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    /// `(num / den)`, both counts.
    fn fraction(num: usize, den: usize) -> Self {
        Self::from_ratio(num as i64, den as i64)
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        (numer as f64 / denom as f64) as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for Ratio<i64> {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(numer, denom)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Parse a plain decimal literal (`3`, `0.25`, `-1.5`) into an exact ratio.
///
/// Exponent notation is not accepted; the input formats only ever carry short
/// decimals.
pub fn parse_decimal(text: &str) -> Option<Ratio<i64>> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if frac_part.len() > 15 {
        return None;
    }
    let mut numer: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let mut denom: i64 = 1;
    for b in frac_part.bytes() {
        numer = numer.checked_mul(10)?.checked_add((b - b'0') as i64)?;
        denom = denom.checked_mul(10)?;
    }
    if neg {
        numer = -numer;
    }
    let r = Ratio::new(numer, denom);
    if r.is_zero() {
        Some(Ratio::zero())
    } else {
        Some(r)
    }
}

/// Convert an exact ratio into any scalar.
pub fn from_exact<S: Scalar>(r: &Ratio<i64>) -> S {
    S::from_ratio(*r.numer(), *r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("0.25"), Some(Ratio::new(1, 4)));
        assert_eq!(parse_decimal("2.5"), Some(Ratio::new(5, 2)));
        assert_eq!(parse_decimal("3"), Some(Ratio::from_integer(3)));
        assert_eq!(parse_decimal("-1.5"), Some(Ratio::new(-3, 2)));
        assert_eq!(parse_decimal(".5"), Some(Ratio::new(1, 2)));
        assert_eq!(parse_decimal("1e3"), None);
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("abc"), None);
    }

    #[test]
    fn fraction_matches_across_scalars() {
        assert_eq!(<Ratio<i64> as Scalar>::fraction(2, 4), Ratio::new(1, 2));
        assert_eq!(<f64 as Scalar>::fraction(1, 4), 0.25);
        assert_eq!(from_exact::<f32>(&Ratio::new(3, 4)), 0.75f32);
    }
}
