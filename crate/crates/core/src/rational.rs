//! Exact rational transform arguments.
//!
//! Transform arguments are kept as arbitrary-precision rationals so that
//! fractional parts of `base^-n * t` can be reduced exactly, with no
//! cancellation, for arguments far beyond the `f64` integer range.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// A signed rational `num/den` with `den >= 1`, stored gcd-reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalArgument {
    num: BigInt,
    den: BigUint,
}

impl RationalArgument {
    /// Builds `num/den`, reducing to canonical form. Fails when `den == 0`.
    pub fn new(num: BigInt, den: BigUint) -> Result<Self, Error> {
        if den.is_zero() {
            return Err(Error::RangeViolation("denominator must be >= 1".into()));
        }
        let mut value = RationalArgument { num, den };
        value.reduce();
        Ok(value)
    }

    pub fn from_integer<T: Into<BigInt>>(n: T) -> Self {
        RationalArgument {
            num: n.into(),
            den: BigUint::one(),
        }
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = BigUint::one();
            return;
        }
        let g = self.num.magnitude().gcd(&self.den);
        if !g.is_one() {
            self.num /= BigInt::from(g.clone());
            self.den /= g;
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn abs(&self) -> Self {
        RationalArgument {
            num: self.num.abs(),
            den: self.den.clone(),
        }
    }

    /// `1 - self`; intended for values in `[0, 1]`.
    pub fn one_minus(&self) -> Self {
        let num = BigInt::from(self.den.clone()) - &self.num;
        RationalArgument {
            num,
            den: self.den.clone(),
        }
        // already reduced: gcd(den - num, den) = gcd(num, den) = 1
    }

    /// Converts a value known to lie in `[0, 1]` to `f64`, rounding toward
    /// zero with absolute error below `2^-64`.
    pub fn to_f64_unit(&self) -> f64 {
        debug_assert!(!self.is_negative());
        let scaled = (self.num.magnitude() << 64u32) / &self.den;
        match scaled.to_u64() {
            Some(v) => v as f64 * (1.0 / 18_446_744_073_709_551_616.0),
            None => 1.0, // value == 1 exactly
        }
    }

    /// Approximate `f64` value of an arbitrary rational (for reporting only).
    pub fn to_f64(&self) -> f64 {
        let num = self
            .num
            .to_f64()
            .unwrap_or(f64::INFINITY * self.signum_f64());
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        if num.is_finite() && den.is_finite() {
            num / den
        } else {
            // fall back to a bit-length based estimate
            let bits = self.num.magnitude().bits() as i64 - self.den.bits() as i64;
            self.signum_f64() * 2f64.powi(bits as i32)
        }
    }

    fn signum_f64(&self) -> f64 {
        if self.num.is_negative() {
            -1.0
        } else {
            1.0
        }
    }
}

impl PartialOrd for RationalArgument {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalArgument {
    fn cmp(&self, other: &Self) -> Ordering {
        // cross-multiply; denominators are positive
        let lhs = &self.num * BigInt::from(other.den.clone());
        let rhs = &other.num * BigInt::from(self.den.clone());
        lhs.cmp(&rhs)
    }
}

impl FromStr for RationalArgument {
    type Err = Error;

    /// Accepts `<int>` or `<int>/<int>`; no decimal points or exponents.
    fn from_str(text: &str) -> Result<Self, Error> {
        let text = text.trim();
        let bad = || Error::RangeViolation(format!("not a rational literal: `{text}`"));
        let parse_int = |s: &str| -> Result<BigInt, Error> {
            if s.is_empty() || s.contains(['e', 'E', '.', '+']) {
                return Err(bad());
            }
            BigInt::from_str(s).map_err(|_| bad())
        };
        match text.split_once('/') {
            None => Ok(RationalArgument::from_integer(parse_int(text)?)),
            Some((num, den)) => {
                let num = parse_int(num)?;
                let den = parse_int(den)?;
                if den.is_negative() || den.is_zero() {
                    return Err(bad());
                }
                RationalArgument::new(num, den.magnitude().clone())
            }
        }
    }
}

impl fmt::Display for RationalArgument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
