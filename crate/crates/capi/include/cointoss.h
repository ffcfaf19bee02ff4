#ifndef COINTOSS_H
#define COINTOSS_H

/* This file is generated by cbindgen from cointoss-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_INVALID_WEIGHT_SPEC = 1,
  CT_STATUS_RANGE_VIOLATION = 2,
  CT_STATUS_PRECONDITION_VIOLATION = 3,
  CT_STATUS_PRECISION_EXHAUSTED = 4,
  /**
   * Null pointer, unparsable number, or undersized buffer.
   */
  CT_STATUS_INVALID_ARGUMENT = 5,
  /**
   * A panic was caught at the boundary.
   */
  CT_STATUS_INTERNAL = 6,
} CtStatus;

/**
 * Opaque weight-function handle.
 */
typedef struct CtWeight CtWeight;

/**
 * Truncated transform evaluation.
 */
typedef struct CtTransformValue {
  double re;
  double im;
  double truncation_bound;
  uint64_t terms_used;
} CtTransformValue;

/**
 * Decay-envelope constants; `case_tag` is 1 or 2.
 */
typedef struct CtDecayConstants {
  int32_t case_tag;
  double k_phi;
  double delta;
  double gamma;
  double c;
  double c1;
  double c2;
  double final_multiplier;
} CtDecayConstants;

/**
 * Block-structure summary of an integer argument.
 */
typedef struct CtBlockSummary {
  uint64_t m;
  uint64_t member_count;
  uint64_t good_block_count;
  bool half_odd_property_pass;
} CtBlockSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static version string of the underlying library.
 */
const char *ct_version(void);

/**
 * Copies the most recent error message for this thread into `buf`
 * (truncating if needed) and returns the full message length in bytes,
 * excluding the terminator.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null (then only the
 * length is returned).
 */
size_t ct_last_error_message(char *buf, size_t len);

/**
 * Parses a weight DSL string into a handle owned by the caller.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be a valid pointer.
 */
enum CtStatus ct_weight_parse(const char *text, struct CtWeight **out);

/**
 * Releases a handle from [`ct_weight_parse`]; null is ignored.
 *
 * # Safety
 * `weight` must be a pointer returned by [`ct_weight_parse`] that has not
 * been freed already.
 */
void ct_weight_free(struct CtWeight *weight);

/**
 * Evaluates `phi(n)`, `n >= 1`.
 *
 * # Safety
 * `weight` must be a live handle; `out` must be valid.
 */
enum CtStatus ct_weight_phi(const struct CtWeight *weight, uint64_t n, double *out);

/**
 * Classifies the weight ratio over `n = 1..=horizon`; writes 1 (ratio
 * below 2), 2 (ratio at least 2), or 0 (mixed).
 *
 * # Safety
 * `weight` must be a live handle; `out` must be valid.
 */
enum CtStatus ct_weight_case_tag(const struct CtWeight *weight, uint64_t horizon, int32_t *out);

/**
 * Evaluates the transform at the rational argument `t` (decimal string,
 * `"p"` or `"p/q"`).
 *
 * # Safety
 * `weight` must be a live handle; `t` must be NUL-terminated; `out` must
 * be valid.
 */
enum CtStatus ct_mu_hat(const struct CtWeight *weight,
                        const char *t,
                        uint32_t guard_bits,
                        uint32_t base,
                        struct CtTransformValue *out);

/**
 * Evaluates the squared-modulus product at `t`, base 2.
 *
 * # Safety
 * As [`ct_mu_hat`]; `value` and `truncation_bound` must be valid.
 */
enum CtStatus ct_mu_hat_sq(const struct CtWeight *weight,
                           const char *t,
                           uint32_t guard_bits,
                           double *value,
                           double *truncation_bound);

/**
 * Evaluates the transform at `t = 2^m` through the exact simplification.
 *
 * # Safety
 * `weight` must be a live handle; `out` must be valid.
 */
enum CtStatus ct_mu_hat_at_pow2(const struct CtWeight *weight,
                                uint64_t m,
                                uint32_t guard_bits,
                                struct CtTransformValue *out);

/**
 * Derives the decay-envelope constants of a classified weight.
 *
 * # Safety
 * `weight` must be a live handle; `out` must be valid.
 */
enum CtStatus ct_derive_constants(const struct CtWeight *weight, struct CtDecayConstants *out);

/**
 * Evaluates the decay envelope at a real argument `t >= 2`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum CtStatus ct_theoretical_bound(const struct CtWeight *weight, double t, double *out);

/**
 * Decomposes an integer argument (decimal string, >= 2) into threshold
 * blocks and verifies the half-odd-integer property at every good index.
 *
 * # Safety
 * `t` must be NUL-terminated; `out` must be valid.
 */
enum CtStatus ct_block_decompose(const char *t, double k_phi, struct CtBlockSummary *out);

/**
 * Upper envelope for the squared transform modulus at an integer argument,
 * from the block decomposition at the weight's own threshold.
 *
 * # Safety
 * As [`ct_block_decompose`], plus a live `weight` handle.
 */
enum CtStatus ct_block_envelope_bound(const struct CtWeight *weight, const char *t, double *out);

/**
 * Checks `|a + b e(t)| <= a + b - 4 min(a,b) ||t||^2` (both coefficients
 * must be positive).
 */
bool ct_check_modulus_contraction(double a, double b, double t);

/**
 * Verifies the lower envelope at `t = 2^m`; writes both sides of the
 * inequality and the verdict.
 *
 * # Safety
 * `weight` must be a live handle; out-pointers must be valid.
 */
enum CtStatus ct_lower_bound_check(const struct CtWeight *weight,
                                   uint64_t m,
                                   double *lhs,
                                   double *rhs,
                                   bool *pass);

/**
 * Verifies the constant transform floor along `a^k`, `k = 1..=k_max`, for
 * a base `a >= 3`.
 *
 * # Safety
 * `weight` must be a live handle; out-pointers must be valid.
 */
enum CtStatus ct_rajchman_check(const struct CtWeight *weight,
                                uint32_t a,
                                uint32_t k_max,
                                double *floor,
                                bool *pass);

/**
 * Samples the first `len` binary digits of the point keyed by `seed` into
 * `buf` (one digit per byte, values 0 or 1).
 *
 * # Safety
 * `weight` must be a live handle; `buf` must point to `len` writable bytes.
 */
enum CtStatus ct_sample_digits(const struct CtWeight *weight,
                               uint64_t seed,
                               uint8_t *buf,
                               size_t len);

/**
 * Converts a sampled point to certified base-`base` digits. Writes at most
 * `buf_len` digits and stores the certified count in `certified`.
 *
 * # Safety
 * `weight` must be a live handle; `buf` must point to `buf_len` writable
 * bytes; `certified` must be valid.
 */
enum CtStatus ct_digits_in_base(const struct CtWeight *weight,
                                uint64_t seed,
                                size_t binary_digits,
                                uint32_t base,
                                uint8_t *buf,
                                size_t buf_len,
                                size_t *certified);

/**
 * Exponential-sum average over the orbit of a sampled point under
 * multiplication by `base`. `terms_used` reports how many terms were
 * certified and summed.
 *
 * # Safety
 * `weight` must be a live handle; out-pointers must be valid.
 */
enum CtStatus ct_weyl_sum(const struct CtWeight *weight,
                          uint64_t seed,
                          size_t binary_digits,
                          uint32_t base,
                          int64_t h,
                          size_t terms,
                          double *re,
                          double *im,
                          size_t *terms_used);

/**
 * Exact star discrepancy of `len` values in `[0, 1)`.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be valid.
 */
enum CtStatus ct_star_discrepancy(const double *values, size_t len, double *out);

/**
 * Growth exponent of the partial sums of `|transform(h * base^n)|`.
 *
 * # Safety
 * `weight` must be a live handle; `out` must be valid.
 */
enum CtStatus ct_del_exponent(const struct CtWeight *weight,
                              int64_t h,
                              uint32_t base,
                              size_t terms,
                              double *out);

/**
 * Splits `b = b0 * 2^tau0` with `b0` odd; `l` receives the largest
 * exponent with `b = 1 mod 2^l`, or -1 when `b` is even.
 *
 * # Safety
 * Out-pointers must be valid.
 */
enum CtStatus ct_two_adic_split(uint64_t b, uint64_t *b0, uint32_t *tau0, int32_t *l);

/**
 * Verifies the residue-string bijection for odd `h` and odd `b` with
 * `l >= 2`.
 *
 * # Safety
 * `pass` must be valid.
 */
enum CtStatus ct_cassels_check(int64_t h, uint64_t b, uint32_t r, bool *pass);

/**
 * Counts adjacent `(0,1)` / `(1,0)` digit pairs; `case_one` receives
 * whether the count reaches `epsilon * len`.
 *
 * # Safety
 * `bits` must point to `len` readable bytes; out-pointers must be valid.
 */
enum CtStatus ct_regular_pairs(const uint8_t *bits,
                               size_t len,
                               double epsilon,
                               size_t *count,
                               bool *case_one);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COINTOSS_H */
