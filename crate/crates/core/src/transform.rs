//! Truncated evaluation of the transform product with rigorous tail bounds.
//!
//! The transform of the measure is the infinite product over `n >= 1` of
//! `(1 + phi(n))/2 + (1 - phi(n))/2 * e(base^-n * t)`, with `e(x) = exp(2 pi i x)`.
//! Each factor has modulus at most 1 and differs from 1 by at most
//! `pi * base^-n * |t|`, so truncating after `N` factors leaves a tail error
//! of at most `exp(pi * |t| * base^-N * base/(base-1)) - 1`. The reported
//! `truncation_bound` is that tail bound plus a conservative allowance for
//! per-factor floating-point rounding; the exact transform value always lies
//! within `truncation_bound` of the returned product.
//!
//! Fractional parts `base^-n * t` are reduced exactly in big-integer
//! arithmetic and converted to `f64` only at the final trigonometric step.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::RationalArgument;
use crate::weights::WeightSpec;

/// Default number of guard factors beyond `ceil(log_base |t|)`; the base-2
/// tail bound is then `exp(pi * 2^-39) - 1 < 1e-11`.
pub const DEFAULT_GUARD_BITS: u32 = 40;

/// Hard ceiling on the number of evaluated factors.
const MAX_TERMS: u64 = 1 << 24;

/// Per-factor multiplicative rounding allowance (a few ulps per factor for
/// the argument conversion, the trig evaluations, and the product update).
const FLOAT_ULPS_PER_FACTOR: f64 = 8.0 * f64::EPSILON;

/// A truncated product evaluation together with its rigorous error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformValue<T> {
    pub value: T,
    pub truncation_bound: f64,
    pub terms_used: u64,
}

pub type ComplexTransform = TransformValue<Complex64>;
pub type RealTransform = TransformValue<f64>;

/// Exact reduction of `base^-n * t` modulo one.
///
/// Returns `(frac, dist)` where `frac` is the fractional part in `[0, 1)`
/// and `dist = min(frac, 1 - frac)` is the distance to the nearest integer,
/// both as exact rationals.
pub fn reduce_argument(
    t: &RationalArgument,
    base: u32,
    n: u32,
) -> (RationalArgument, RationalArgument) {
    assert!(base >= 2, "base must be >= 2");
    let scaled_den = t.denom() * BigUint::from(base).pow(n);
    let frac_num = t.numer().mod_floor(&BigInt::from(scaled_den.clone()));
    let frac = RationalArgument::new(frac_num, scaled_den).expect("nonzero denominator");
    let complement = frac.one_minus();
    let dist = if frac <= complement {
        frac.clone()
    } else {
        complement
    };
    (frac, dist)
}

/// One product factor `(1 + phi)/2 + (1 - phi)/2 * e(theta)` for an exact
/// fractional argument `theta` in `[0, 1)`.
pub fn factor(phi_n: f64, theta: &RationalArgument) -> Complex64 {
    factor_f64(phi_n, theta.to_f64_unit())
}

#[inline]
fn factor_f64(phi_n: f64, theta: f64) -> Complex64 {
    debug_assert!(phi_n > 0.0 && phi_n <= 1.0);
    let (s, c) = (std::f64::consts::TAU * theta).sin_cos();
    Complex64::new(
        0.5 * (1.0 + phi_n) + 0.5 * (1.0 - phi_n) * c,
        0.5 * (1.0 - phi_n) * s,
    )
}

/// Squared modulus of a factor, evaluated directly as
/// `phi^2 sin^2(pi theta) + cos^2(pi theta)`.
pub fn factor_modulus_sq(phi_n: f64, theta: &RationalArgument) -> f64 {
    factor_sq_f64(phi_n, theta.to_f64_unit())
}

#[inline]
fn factor_sq_f64(phi_n: f64, theta: f64) -> f64 {
    let (s, c) = (std::f64::consts::PI * theta).sin_cos();
    phi_n * phi_n * s * s + c * c
}

/// Number of factors needed for `|t|`: `max(0, ceil(log_base |t|)) + guard`.
fn term_count(t: &RationalArgument, base: u32, guard_bits: u32) -> Result<u64> {
    let p = t.numer().magnitude();
    let q = t.denom();
    let lead = if base == 2 && q.is_one() {
        // ceil(log2 t) = bit length of t - 1 for integer t >= 1
        if p.is_zero() {
            0
        } else {
            (p - 1u32).bits()
        }
    } else {
        // smallest k with base^k >= p/q
        let mut k = 0u64;
        let mut scaled = q.clone();
        while scaled < *p {
            scaled *= base;
            k += 1;
            if k > MAX_TERMS {
                break;
            }
        }
        k
    };
    let n = lead + guard_bits as u64;
    if n > MAX_TERMS {
        return Err(Error::RangeViolation(format!(
            "argument needs {n} factors, beyond the {MAX_TERMS} horizon"
        )));
    }
    Ok(n)
}

/// Tail bound `exp(pi * ratio * base/(base-1)) - 1` for the neglected
/// factors, where `ratio` is an upper estimate of `|t| * base^-N`.
fn tail_bound(t: &RationalArgument, base: u32, terms: u64) -> f64 {
    let p = t.numer().magnitude().clone();
    let q = if base == 2 {
        t.denom() << terms
    } else {
        t.denom() * BigUint::from(base).pow(terms as u32)
    };
    let ratio = ratio_upper_f64(&p, &q);
    let b = base as f64;
    (std::f64::consts::PI * ratio * b / (b - 1.0)).exp_m1()
}

/// Upper bound on `p/q` as `f64`; exact inputs with `p <= q` assumed
/// (rounded up by one part in `2^64`).
fn ratio_upper_f64(p: &BigUint, q: &BigUint) -> f64 {
    debug_assert!(p <= q);
    let scaled = (p << 64u32) / q + 1u32;
    scaled.to_f64().unwrap_or(u64::MAX as f64) * (1.0 / 18_446_744_073_709_551_616.0)
}

fn float_error(terms: u64) -> f64 {
    (1.0 + FLOAT_ULPS_PER_FACTOR).powi(terms.min(i32::MAX as u64) as i32) - 1.0
}

/// Fractional part of `t / 2^n` for a nonnegative integer `t`, read directly
/// from the bit window `[n - 64, n)` of `t`; error below `2^-64`.
fn dyadic_frac_f64(t: &BigUint, n: u64) -> f64 {
    let window = if n <= 64 {
        let mask = (BigUint::one() << n) - 1u32;
        let low: u64 = (t & &mask).to_u64().expect("fits in 64 bits");
        if n == 64 {
            low
        } else {
            low << (64 - n)
        }
    } else {
        let mask = BigUint::from(u64::MAX);
        ((t >> (n - 64)) & mask).to_u64().expect("fits in 64 bits")
    };
    window as f64 * (1.0 / 18_446_744_073_709_551_616.0)
}

/// Evaluates the truncated transform product at an exact rational argument.
///
/// The number of factors is `max(0, ceil(log_base |t|)) + guard_bits`; the
/// exact transform satisfies `|exact - value| <= truncation_bound`.
pub fn mu_hat(
    spec: &WeightSpec,
    t: &RationalArgument,
    guard_bits: u32,
    base: u32,
) -> Result<ComplexTransform> {
    assert!(guard_bits >= 1, "guard_bits must be >= 1");
    assert!(base >= 2, "base must be >= 2");
    if t.is_zero() {
        return Ok(TransformValue {
            value: Complex64::new(1.0, 0.0),
            truncation_bound: 0.0,
            terms_used: 1,
        });
    }
    let t_abs = t.abs();
    let terms = term_count(&t_abs, base, guard_bits)?;
    let mut value = Complex64::new(1.0, 0.0);
    if base == 2 && t_abs.is_integer() {
        let int = t_abs.numer().magnitude();
        for n in 1..=terms {
            value *= factor_f64(spec.phi(n), dyadic_frac_f64(int, n));
        }
    } else {
        for n in 1..=terms {
            let (frac, _) = reduce_argument(&t_abs, base, n as u32);
            value *= factor(spec.phi(n), &frac);
        }
    }
    if t.is_negative() {
        value = value.conj();
    }
    let truncation_bound = tail_bound(&t_abs, base, terms) + float_error(terms);
    Ok(TransformValue {
        value,
        truncation_bound,
        terms_used: terms,
    })
}

/// Evaluates the squared-modulus product `prod (phi^2 sin^2 + cos^2)` at an
/// exact rational argument, base 2.
pub fn mu_hat_sq(
    spec: &WeightSpec,
    t: &RationalArgument,
    guard_bits: u32,
) -> Result<RealTransform> {
    assert!(guard_bits >= 1, "guard_bits must be >= 1");
    if t.is_zero() {
        return Ok(TransformValue {
            value: 1.0,
            truncation_bound: 0.0,
            terms_used: 1,
        });
    }
    let t_abs = t.abs();
    let terms = term_count(&t_abs, 2, guard_bits)?;
    let mut value = 1.0f64;
    if t_abs.is_integer() {
        let int = t_abs.numer().magnitude();
        for n in 1..=terms {
            value *= factor_sq_f64(spec.phi(n), dyadic_frac_f64(int, n));
        }
    } else {
        for n in 1..=terms {
            let (frac, _) = reduce_argument(&t_abs, 2, n as u32);
            value *= factor_modulus_sq(spec.phi(n), &frac);
        }
    }
    let truncation_bound = tail_bound(&t_abs, 2, terms) + float_error(terms);
    Ok(TransformValue {
        value,
        truncation_bound,
        terms_used: terms,
    })
}

/// Evaluates the transform at `t = 2^m` through the exact simplification:
/// factors `n <= m` equal 1, the factor at `n = m + 1` equals `phi(m + 1)`
/// exactly, and later factors see the dyadic argument `2^(m-n)`.
///
/// Because the product carries the exact leading factor `phi(m + 1)`, the
/// truncation bound scales with it, keeping the bound meaningful even when
/// the value itself is far below the absolute tail bound of [`mu_hat`].
pub fn mu_hat_at_pow2(spec: &WeightSpec, m: u64, guard_bits: u32) -> ComplexTransform {
    assert!(guard_bits >= 1, "guard_bits must be >= 1");
    let terms = m + guard_bits as u64;
    let lead = spec.phi(m + 1);
    let mut value = Complex64::new(lead, 0.0);
    for n in (m + 2)..=terms {
        // exact dyadic argument 2^(m-n)
        value *= factor_f64(spec.phi(n), 2f64.powi(-((n - m) as i32)));
    }
    let tail = (std::f64::consts::PI * 2f64.powi(-(guard_bits as i32) + 1)).exp_m1();
    let truncation_bound = lead * (tail + float_error(terms));
    TransformValue {
        value,
        truncation_bound,
        terms_used: terms,
    }
}
