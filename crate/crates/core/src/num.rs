// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction for the real-valued sort.
//!
//! Integers are always exact `i64`. Reals are generic so the same interpreter
//! and term evaluator can run in binary floating point (what a C compiler would
//! do) or in exact rationals (what the solver reasons about).

use std::fmt::{Debug, Display};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use num_traits::{FromPrimitive, Num};

/// A real scalar usable by the interpreter and the model evaluator.
pub trait Real:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    /// Parses a decimal literal such as `3.25`, `-0.5` or `7`.
    fn from_decimal(text: &str) -> Option<Self>;

    /// Builds the value `num / den`.
    fn from_ratio(num: &BigInt, den: &BigInt) -> Option<Self>;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("every i64 is representable")
    }

    /// C-style conversion to int: truncation toward zero.
    fn trunc_to_i64(&self) -> Option<i64>;

    /// Equality used when comparing program outputs.
    fn same(&self, other: &Self) -> bool;
}

macro_rules! impl_float_real {
    ($f:ty, $eps:expr) => {
        impl Real for $f {
            const EXACT: bool = false;

            fn from_decimal(text: &str) -> Option<Self> {
                text.parse::<$f>().ok()
            }

            fn from_ratio(num: &BigInt, den: &BigInt) -> Option<Self> {
                let r = BigRational::new(num.clone(), den.clone());
                r.to_f64().map(|v| v as $f)
            }

            fn trunc_to_i64(&self) -> Option<i64> {
                if self.is_finite() && self.abs() < 9.2e18 {
                    Some(self.trunc() as i64)
                } else {
                    None
                }
            }

            fn same(&self, other: &Self) -> bool {
                let scale = self.abs().max(other.abs()).max(1.0);
                (self - other).abs() <= $eps * scale
            }
        }
    };
}

impl_float_real!(f32, 1e-5);
impl_float_real!(f64, 1e-9);

impl Real for BigRational {
    const EXACT: bool = true;

    fn from_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (mantissa, exp) = match body.find(['e', 'E']) {
            Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let digits = if digits.is_empty() { "0".to_string() } else { digits };
        let numer: BigInt = digits.parse().ok()?;
        let scale = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let mut value = BigRational::from_integer(numer);
        if scale >= 0 {
            value *= BigRational::from_integer(num::pow(ten, scale as usize));
        } else {
            value /= BigRational::from_integer(num::pow(ten, (-scale) as usize));
        }
        Some(if neg { -value } else { value })
    }

    fn from_ratio(num: &BigInt, den: &BigInt) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(BigRational::new(num.clone(), den.clone()))
        }
    }

    fn trunc_to_i64(&self) -> Option<i64> {
        self.trunc().to_integer().to_i64()
    }

    fn same(&self, other: &Self) -> bool {
        self == other
    }
}

/// Renders a rational as an SMT-LIB real term.
pub fn rational_to_smt(r: &BigRational) -> String {
    let n = r.numer().abs();
    let d = r.denom().clone();
    let body = if d.is_one() { format!("{n}.0") } else { format!("(/ {n}.0 {d}.0)") };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

/// Exact rational value of a decimal literal.
pub fn decimal_to_rational(text: &str) -> Option<BigRational> {
    BigRational::from_decimal(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_decimal_parsing() {
        let r = BigRational::from_decimal("3.25").unwrap();
        assert_eq!(r, BigRational::new(13.into(), 4.into()));
        let r = BigRational::from_decimal("-0.1").unwrap();
        assert_eq!(r, BigRational::new((-1).into(), 10.into()));
        let r = BigRational::from_decimal("1.5e2").unwrap();
        assert_eq!(r, BigRational::from_integer(150.into()));
        assert!(BigRational::from_decimal(".").is_none());
    }

    #[test]
    fn truncation_is_toward_zero() {
        assert_eq!((-2.7f64).trunc_to_i64(), Some(-2));
        let r = BigRational::new((-7).into(), 2.into());
        assert_eq!(r.trunc_to_i64(), Some(-3));
    }

    #[test]
    fn smt_rendering() {
        assert_eq!(rational_to_smt(&BigRational::from_integer(3.into())), "3.0");
        assert_eq!(rational_to_smt(&BigRational::new((-1).into(), 3.into())), "(- (/ 1.0 3.0))");
    }

    #[test]
    fn float_comparison_is_relative() {
        assert!(0.1f64.same(&(0.3 - 0.2)));
        assert!(!1.0f64.same(&1.001));
    }
}
