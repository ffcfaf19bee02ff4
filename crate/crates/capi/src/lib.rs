//! C ABI for the cointoss library.
//!
//! Conventions: every fallible function returns a [`CtStatus`] and writes
//! its results through out-pointers; weight specs are opaque handles created
//! by [`ct_weight_parse`] and released by [`ct_weight_free`]; big transform
//! arguments are passed as decimal strings (`"123"` or `"123/8"`). A
//! thread-local message describing the most recent error is available via
//! [`ct_last_error_message`]. All functions catch panics and report them as
//! `CT_STATUS_INTERNAL` instead of unwinding across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cointoss::decay;
use cointoss::normality;
use cointoss::rational::RationalArgument;
use cointoss::transform;
use cointoss::weights::{CaseTag, WeightSpec};
use cointoss::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CtStatus {
    Ok = 0,
    InvalidWeightSpec = 1,
    RangeViolation = 2,
    PreconditionViolation = 3,
    PrecisionExhausted = 4,
    /// Null pointer, unparsable number, or undersized buffer.
    InvalidArgument = 5,
    /// A panic was caught at the boundary.
    Internal = 6,
}

/// Opaque weight-function handle.
pub struct CtWeight {
    spec: WeightSpec,
}

/// Truncated transform evaluation.
#[repr(C)]
pub struct CtTransformValue {
    pub re: f64,
    pub im: f64,
    pub truncation_bound: f64,
    pub terms_used: u64,
}

/// Decay-envelope constants; `case_tag` is 1 or 2.
#[repr(C)]
pub struct CtDecayConstants {
    pub case_tag: i32,
    pub k_phi: f64,
    pub delta: f64,
    pub gamma: f64,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub final_multiplier: f64,
}

/// Block-structure summary of an integer argument.
#[repr(C)]
pub struct CtBlockSummary {
    pub m: u64,
    pub member_count: u64,
    pub good_block_count: u64,
    pub half_odd_property_pass: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> CtStatus {
    match err {
        Error::InvalidWeightSpec(_) => CtStatus::InvalidWeightSpec,
        Error::RangeViolation(_) => CtStatus::RangeViolation,
        Error::PreconditionViolation(_) => CtStatus::PreconditionViolation,
        Error::PrecisionExhausted(_) => CtStatus::PrecisionExhausted,
        Error::Io(_) => CtStatus::InvalidArgument,
    }
}

/// Runs a closure, translating errors and panics into status codes.
fn guarded(body: impl FnOnce() -> Result<CtStatus, Error>) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(err)) => {
            set_error(&err.to_string());
            status_of(&err)
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&message);
            CtStatus::Internal
        }
    }
}

fn invalid(message: &str) -> Result<CtStatus, Error> {
    set_error(message);
    Ok(CtStatus::InvalidArgument)
}

/// # Safety
/// `text` must be a NUL-terminated string.
unsafe fn parse_c_str<'a>(text: *const c_char) -> Option<&'a str> {
    if text.is_null() {
        return None;
    }
    CStr::from_ptr(text).to_str().ok()
}

unsafe fn parse_rational(text: *const c_char) -> Result<RationalArgument, String> {
    let text = parse_c_str(text).ok_or("argument string is null or not UTF-8")?;
    text.parse::<RationalArgument>().map_err(|e| e.to_string())
}

/// Static version string of the underlying library.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the most recent error message for this thread into `buf`
/// (truncating if needed) and returns the full message length in bytes,
/// excluding the terminator.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (then only the
/// length is returned).
#[no_mangle]
pub unsafe extern "C" fn ct_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && len > 0 {
            let copy = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, copy);
            *buf.add(copy) = 0;
        }
        bytes.len()
    })
}

/// Parses a weight DSL string into a handle owned by the caller.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_weight_parse(text: *const c_char, out: *mut *mut CtWeight) -> CtStatus {
    guarded(|| {
        if out.is_null() {
            return invalid("out pointer is null");
        }
        let Some(text) = parse_c_str(text) else {
            return invalid("weight text is null or not UTF-8");
        };
        let spec = WeightSpec::parse(text)?;
        *out = Box::into_raw(Box::new(CtWeight { spec }));
        Ok(CtStatus::Ok)
    })
}

/// Releases a handle from [`ct_weight_parse`]; null is ignored.
///
/// # Safety
/// `weight` must be a pointer returned by [`ct_weight_parse`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn ct_weight_free(weight: *mut CtWeight) {
    if !weight.is_null() {
        drop(Box::from_raw(weight));
    }
}

unsafe fn weight_ref<'a>(weight: *const CtWeight) -> Option<&'a WeightSpec> {
    weight.as_ref().map(|w| &w.spec)
}

/// Evaluates `phi(n)`, `n >= 1`.
///
/// # Safety
/// `weight` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_weight_phi(weight: *const CtWeight, n: u64, out: *mut f64) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), out.is_null()) else {
            return invalid("null pointer");
        };
        if n == 0 {
            return invalid("weight index must be >= 1");
        }
        *out = spec.phi(n);
        Ok(CtStatus::Ok)
    })
}

/// Classifies the weight ratio over `n = 1..=horizon`; writes 1 (ratio
/// below 2), 2 (ratio at least 2), or 0 (mixed).
///
/// # Safety
/// `weight` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_weight_case_tag(
    weight: *const CtWeight,
    horizon: u64,
    out: *mut i32,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), out.is_null()) else {
            return invalid("null pointer");
        };
        if horizon < 2 {
            return invalid("horizon must be >= 2");
        }
        *out = match spec.classify_ratio(horizon) {
            CaseTag::Case1 => 1,
            CaseTag::Case2 => 2,
            CaseTag::Mixed => 0,
        };
        Ok(CtStatus::Ok)
    })
}

/// Evaluates the transform at the rational argument `t` (decimal string,
/// `"p"` or `"p/q"`).
///
/// # Safety
/// `weight` must be a live handle; `t` must be NUL-terminated; `out` must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_mu_hat(
    weight: *const CtWeight,
    t: *const c_char,
    guard_bits: u32,
    base: u32,
    out: *mut CtTransformValue,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), out.is_null()) else {
            return invalid("null pointer");
        };
        let t = match parse_rational(t) {
            Ok(t) => t,
            Err(e) => return invalid(&e),
        };
        if guard_bits < 1 || base < 2 {
            return invalid("need guard_bits >= 1 and base >= 2");
        }
        let value = transform::mu_hat(spec, &t, guard_bits, base)?;
        *out = CtTransformValue {
            re: value.value.re,
            im: value.value.im,
            truncation_bound: value.truncation_bound,
            terms_used: value.terms_used,
        };
        Ok(CtStatus::Ok)
    })
}

/// Evaluates the squared-modulus product at `t`, base 2.
///
/// # Safety
/// As [`ct_mu_hat`]; `value` and `truncation_bound` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_mu_hat_sq(
    weight: *const CtWeight,
    t: *const c_char,
    guard_bits: u32,
    value: *mut f64,
    truncation_bound: *mut f64,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (
            weight_ref(weight),
            value.is_null() || truncation_bound.is_null(),
        ) else {
            return invalid("null pointer");
        };
        let t = match parse_rational(t) {
            Ok(t) => t,
            Err(e) => return invalid(&e),
        };
        if guard_bits < 1 {
            return invalid("need guard_bits >= 1");
        }
        let result = transform::mu_hat_sq(spec, &t, guard_bits)?;
        *value = result.value;
        *truncation_bound = result.truncation_bound;
        Ok(CtStatus::Ok)
    })
}

/// Evaluates the transform at `t = 2^m` through the exact simplification.
///
/// # Safety
/// `weight` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_mu_hat_at_pow2(
    weight: *const CtWeight,
    m: u64,
    guard_bits: u32,
    out: *mut CtTransformValue,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), out.is_null()) else {
            return invalid("null pointer");
        };
        if guard_bits < 1 {
            return invalid("need guard_bits >= 1");
        }
        let value = transform::mu_hat_at_pow2(spec, m, guard_bits);
        *out = CtTransformValue {
            re: value.value.re,
            im: value.value.im,
            truncation_bound: value.truncation_bound,
            terms_used: value.terms_used,
        };
        Ok(CtStatus::Ok)
    })
}

/// Derives the decay-envelope constants of a classified weight.
///
/// # Safety
/// `weight` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_derive_constants(
    weight: *const CtWeight,
    out: *mut CtDecayConstants,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), out.is_null()) else {
            return invalid("null pointer");
        };
        let consts = decay::derive_constants(spec, spec.classify_ratio(64))?;
        *out = CtDecayConstants {
            case_tag: if consts.case_tag == CaseTag::Case2 {
                2
            } else {
                1
            },
            k_phi: consts.k_phi,
            delta: consts.delta,
            gamma: consts.gamma,
            c: consts.c,
            c1: consts.c1,
            c2: consts.c2,
            final_multiplier: consts.final_multiplier,
        };
        Ok(CtStatus::Ok)
    })
}

/// Evaluates the decay envelope at a real argument `t >= 2`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_theoretical_bound(
    weight: *const CtWeight,
    t: f64,
    out: *mut f64,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), out.is_null()) else {
            return invalid("null pointer");
        };
        if t.is_nan() || t < 2.0 {
            return invalid("envelope is defined for t >= 2");
        }
        let consts = decay::derive_constants(spec, spec.classify_ratio(64))?;
        *out = decay::theoretical_bound(&consts, spec, t);
        Ok(CtStatus::Ok)
    })
}

/// Decomposes an integer argument (decimal string, >= 2) into threshold
/// blocks and verifies the half-odd-integer property at every good index.
///
/// # Safety
/// `t` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_block_decompose(
    t: *const c_char,
    k_phi: f64,
    out: *mut CtBlockSummary,
) -> CtStatus {
    guarded(|| {
        if out.is_null() {
            return invalid("out pointer is null");
        }
        let t = match parse_rational(t) {
            Ok(t) => t,
            Err(e) => return invalid(&e),
        };
        if !t.is_integer() || t.is_negative() || t.numer().bits() < 2 {
            return invalid("argument must be an integer >= 2");
        }
        if 3.0 * 2f64.powf(-k_phi) > 1.0 {
            return invalid("threshold must satisfy 3 * 2^-K <= 1");
        }
        let decomp = decay::block_decompose(t.numer().magnitude(), k_phi);
        let half_odd = decay::verify_half_odd_property(&decomp);
        *out = CtBlockSummary {
            m: decomp.m,
            member_count: decomp.member_count,
            good_block_count: decomp.good_block_count,
            half_odd_property_pass: half_odd.pass,
        };
        Ok(CtStatus::Ok)
    })
}

/// Upper envelope for the squared transform modulus at an integer argument,
/// from the block decomposition at the weight's own threshold.
///
/// # Safety
/// As [`ct_block_decompose`], plus a live `weight` handle.
#[no_mangle]
pub unsafe extern "C" fn ct_block_envelope_bound(
    weight: *const CtWeight,
    t: *const c_char,
    out: *mut f64,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), out.is_null()) else {
            return invalid("null pointer");
        };
        let t = match parse_rational(t) {
            Ok(t) => t,
            Err(e) => return invalid(&e),
        };
        if !t.is_integer() || t.is_negative() || t.numer().bits() < 2 {
            return invalid("argument must be an integer >= 2");
        }
        let consts = decay::derive_constants(spec, spec.classify_ratio(64))?;
        let decomp = decay::block_decompose(t.numer().magnitude(), consts.k_phi);
        *out = decay::block_envelope_bound(spec, &decomp, &consts)?;
        Ok(CtStatus::Ok)
    })
}

/// Checks `|a + b e(t)| <= a + b - 4 min(a,b) ||t||^2` (both coefficients
/// must be positive).
#[no_mangle]
pub extern "C" fn ct_check_modulus_contraction(a: f64, b: f64, t: f64) -> bool {
    if !(a > 0.0 && b > 0.0) || !t.is_finite() {
        return false;
    }
    decay::check_modulus_contraction(a, b, t)
}

/// Verifies the lower envelope at `t = 2^m`; writes both sides of the
/// inequality and the verdict.
///
/// # Safety
/// `weight` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_lower_bound_check(
    weight: *const CtWeight,
    m: u64,
    lhs: *mut f64,
    rhs: *mut f64,
    pass: *mut bool,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (
            weight_ref(weight),
            lhs.is_null() || rhs.is_null() || pass.is_null(),
        ) else {
            return invalid("null pointer");
        };
        let row = decay::lower_bound_check(spec, m);
        *lhs = row.check.lhs;
        *rhs = row.check.rhs;
        *pass = row.check.pass;
        Ok(CtStatus::Ok)
    })
}

/// Verifies the constant transform floor along `a^k`, `k = 1..=k_max`, for
/// a base `a >= 3`.
///
/// # Safety
/// `weight` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_rajchman_check(
    weight: *const CtWeight,
    a: u32,
    k_max: u32,
    floor: *mut f64,
    pass: *mut bool,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), floor.is_null() || pass.is_null()) else {
            return invalid("null pointer");
        };
        let report = decay::rajchman_check(spec, a, k_max)?;
        *floor = report.floor;
        *pass = report.pass;
        Ok(CtStatus::Ok)
    })
}

/// Samples the first `len` binary digits of the point keyed by `seed` into
/// `buf` (one digit per byte, values 0 or 1).
///
/// # Safety
/// `weight` must be a live handle; `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ct_sample_digits(
    weight: *const CtWeight,
    seed: u64,
    buf: *mut u8,
    len: usize,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), buf.is_null() || len == 0) else {
            return invalid("null or empty buffer");
        };
        let point = normality::sample_point(spec, len, seed);
        std::ptr::copy_nonoverlapping(point.digits.as_ptr(), buf, len);
        Ok(CtStatus::Ok)
    })
}

/// Converts a sampled point to certified base-`base` digits. Writes at most
/// `buf_len` digits and stores the certified count in `certified`.
///
/// # Safety
/// `weight` must be a live handle; `buf` must point to `buf_len` writable
/// bytes; `certified` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_digits_in_base(
    weight: *const CtWeight,
    seed: u64,
    binary_digits: usize,
    base: u32,
    buf: *mut u8,
    buf_len: usize,
    certified: *mut usize,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (
            weight_ref(weight),
            buf.is_null() || certified.is_null() || binary_digits == 0,
        ) else {
            return invalid("null pointer or empty sample");
        };
        if base < 2 {
            return invalid("base must be >= 2");
        }
        let point = normality::sample_point(spec, binary_digits, seed);
        let stream = point.digits_in_base(base, buf_len)?;
        let copy = stream.digits.len().min(buf_len);
        std::ptr::copy_nonoverlapping(stream.digits.as_ptr(), buf, copy);
        *certified = copy;
        Ok(CtStatus::Ok)
    })
}

/// Exponential-sum average over the orbit of a sampled point under
/// multiplication by `base`. `terms_used` reports how many terms were
/// certified and summed.
///
/// # Safety
/// `weight` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_weyl_sum(
    weight: *const CtWeight,
    seed: u64,
    binary_digits: usize,
    base: u32,
    h: i64,
    terms: usize,
    re: *mut f64,
    im: *mut f64,
    terms_used: *mut usize,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (
            weight_ref(weight),
            re.is_null() || im.is_null() || terms_used.is_null(),
        ) else {
            return invalid("null pointer");
        };
        if base < 2 || h == 0 || terms == 0 || binary_digits == 0 {
            return invalid("need base >= 2, h != 0, terms >= 1, binary_digits >= 1");
        }
        let point = normality::sample_point(spec, binary_digits, seed);
        let sum = normality::weyl_sum_point(&point, base, h, terms);
        *re = sum.value.re;
        *im = sum.value.im;
        *terms_used = sum.terms_used;
        Ok(CtStatus::Ok)
    })
}

/// Exact star discrepancy of `len` values in `[0, 1)`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_star_discrepancy(
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> CtStatus {
    guarded(|| {
        if values.is_null() || out.is_null() || len == 0 {
            return invalid("null or empty input");
        }
        let slice = std::slice::from_raw_parts(values, len);
        if slice.iter().any(|v| !(0.0..1.0).contains(v)) {
            return invalid("values must lie in [0, 1)");
        }
        *out = normality::star_discrepancy(slice);
        Ok(CtStatus::Ok)
    })
}

/// Growth exponent of the partial sums of `|transform(h * base^n)|`.
///
/// # Safety
/// `weight` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_del_exponent(
    weight: *const CtWeight,
    h: i64,
    base: u32,
    terms: usize,
    out: *mut f64,
) -> CtStatus {
    guarded(|| {
        let (Some(spec), false) = (weight_ref(weight), out.is_null()) else {
            return invalid("null pointer");
        };
        if base < 2 || h == 0 || terms < 2 {
            return invalid("need base >= 2, h != 0, terms >= 2");
        }
        *out = normality::del_partial_sums(spec, h, base, terms)?.fitted_exponent;
        Ok(CtStatus::Ok)
    })
}

/// Splits `b = b0 * 2^tau0` with `b0` odd; `l` receives the largest
/// exponent with `b = 1 mod 2^l`, or -1 when `b` is even.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_two_adic_split(
    b: u64,
    b0: *mut u64,
    tau0: *mut u32,
    l: *mut i32,
) -> CtStatus {
    guarded(|| {
        if b0.is_null() || tau0.is_null() || l.is_null() {
            return invalid("null pointer");
        }
        if b < 2 {
            return invalid("base must be >= 2");
        }
        let split = normality::two_adic_split(b);
        *b0 = split.b0;
        *tau0 = split.tau0;
        *l = split.l.map_or(-1, |v| v as i32);
        Ok(CtStatus::Ok)
    })
}

/// Verifies the residue-string bijection for odd `h` and odd `b` with
/// `l >= 2`.
///
/// # Safety
/// `pass` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_cassels_check(h: i64, b: u64, r: u32, pass: *mut bool) -> CtStatus {
    guarded(|| {
        if pass.is_null() {
            return invalid("null pointer");
        }
        if r < 1 {
            return invalid("string length must be >= 1");
        }
        *pass = normality::cassels_check(h, b, r)?.pass;
        Ok(CtStatus::Ok)
    })
}

/// Counts adjacent `(0,1)` / `(1,0)` digit pairs; `case_one` receives
/// whether the count reaches `epsilon * len`.
///
/// # Safety
/// `bits` must point to `len` readable bytes; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ct_regular_pairs(
    bits: *const u8,
    len: usize,
    epsilon: f64,
    count: *mut usize,
    case_one: *mut bool,
) -> CtStatus {
    guarded(|| {
        if bits.is_null() || count.is_null() || case_one.is_null() {
            return invalid("null pointer");
        }
        let slice = std::slice::from_raw_parts(bits, len);
        let (n, case) = normality::regular_pairs(slice, epsilon)?;
        *count = n;
        *case_one = case == normality::RegularCase::CaseI;
        Ok(CtStatus::Ok)
    })
}
