//! Scalar abstraction shared by every domain operation.
//!
//! All domain code is written against [`Scalar`], which is implemented for
//! `f32`, `f64` and exact rationals ([`Rational`]). Floating-point instances
//! widen computed bounds by one ulp where soundness depends on it; the exact
//! instance leaves them untouched.

use std::fmt::{Debug, Display};

use num::bigint::BigInt;
use num::{BigRational, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    /// Converts a finite `f64`. Rationals take the exact binary value.
    fn of_f64(x: f64) -> Self;

    fn to_f64_lossy(&self) -> f64;

    /// Parses a decimal literal such as `-12.5e-3`. Rationals parse exactly.
    fn from_decimal(text: &str) -> Option<Self>;

    /// Absolute slack used when comparing computed quantities.
    fn tolerance() -> Self;

    /// Largest representable value not above `self` after a rounding step.
    /// Zero is returned unchanged.
    fn round_down(self) -> Self;

    /// Smallest representable value not below `self` after a rounding step.
    fn round_up(self) -> Self;

    fn of_i64(x: i64) -> Self {
        Self::from_i64(x).expect("i64 always converts")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `|self - other| <= tol`.
    fn approx_eq(&self, other: &Self, tol: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tol
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn of_f64(x: f64) -> Self {
                x as $t
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }

            fn from_decimal(text: &str) -> Option<Self> {
                text.trim().parse::<$t>().ok().filter(|v| v.is_finite())
            }

            fn tolerance() -> Self {
                $tol
            }

            fn round_down(self) -> Self {
                if self.is_finite() && self != 0.0 {
                    self.next_down()
                } else {
                    self
                }
            }

            fn round_up(self) -> Self {
                if self.is_finite() && self != 0.0 {
                    self.next_up()
                } else {
                    self
                }
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-4);

impl Scalar for Rational {
    const EXACT: bool = true;

    fn of_f64(x: f64) -> Self {
        BigRational::from_f64(x).expect("finite f64")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    fn from_decimal(text: &str) -> Option<Self> {
        parse_decimal_exact(text.trim())
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn round_down(self) -> Self {
        self
    }

    fn round_up(self) -> Self {
        self
    }
}

fn parse_decimal_exact(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str_radix(if all_digits.is_empty() { "0" } else { &all_digits }, 10).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num::pow(ten, (-scale) as usize))
    };
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn decimal_literals_parse_exactly() {
        assert_eq!(Rational::from_decimal("0.444"), Some(q(444, 1000)));
        assert_eq!(Rational::from_decimal("-2.5"), Some(q(-5, 2)));
        assert_eq!(Rational::from_decimal("1e3"), Some(q(1000, 1)));
        assert_eq!(Rational::from_decimal("12.5e-1"), Some(q(5, 4)));
        assert_eq!(Rational::from_decimal(".5"), Some(q(1, 2)));
        assert_eq!(Rational::from_decimal("abc"), None);
        assert_eq!(Rational::from_decimal("."), None);
        assert_eq!(f64::from_decimal("0.1"), Some(0.1));
    }

    #[test]
    fn float_rounding_moves_outward() {
        assert!(1.0f64.round_down() < 1.0);
        assert!(1.0f64.round_up() > 1.0);
        assert_eq!(q(1, 3).round_up(), q(1, 3));
    }
}
