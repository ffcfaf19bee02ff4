//! Decay-envelope constants, binary block decomposition, and verification
//! sweeps.
//!
//! For an integer argument `t` with `2^m <= t < 2^(m+1)`, the indices
//! `n = 1..=m` are classified by whether `2^-n * t` lies within `2^-K` of an
//! integer. Maximal runs of such indices form blocks; the first index after
//! a block (when it is still `<= m`) is the block's good index, where the
//! argument provably sits close to a half-odd integer and the corresponding
//! product factor is small. Combining the per-block factor bounds with a
//! uniform contraction `delta` on the remaining indices yields the explicit
//! decay envelopes checked here.
//!
//! Membership tests are exact: `K` is kept on a grid of multiples of 1/64,
//! so `dist < 2^-K` is decided by comparing `dist^64 * 2^(64 K)` with 1 in
//! big-integer arithmetic. No floating-point boundary ambiguity exists.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::RationalArgument;
use crate::report::{format_f64, CheckRow};
use crate::rng::{keyed_u64, STREAM_OCTAVE};
use crate::transform::{mu_hat, mu_hat_at_pow2, DEFAULT_GUARD_BITS};
use crate::weights::{CaseTag, WeightSpec};

/// Explicit constants of the decay envelope for a classified weight.
///
/// `delta = 1 - (1 - phi^2(1)) sin^2(pi 2^-K)` contracts every factor whose
/// argument stays `2^-K` away from the integers, and
/// `gamma = -log2(delta) / 2` (clamped below 1) is the resulting exponent.
/// Case 1 uses the envelope `final_multiplier * phi(ceil(gamma log2 t))`
/// with `final_multiplier = 2 sqrt(C)`; case 2 uses `C2 * t^-gamma` with
/// `C2 = 2^gamma sqrt(C1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstants {
    pub case_tag: CaseTag,
    /// Threshold exponent, rounded up to the next multiple of 1/64.
    pub k_phi: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Case-1 envelope constant `1 + pi^2 4^-K / phi^2(1)`.
    pub c: f64,
    /// Case-2 product constant `1 + phi^2(1)`.
    pub c1: f64,
    /// Case-2 final constant `2^gamma sqrt(C1)`.
    pub c2: f64,
    /// Case-1 final constant `2 sqrt(C)`.
    pub final_multiplier: f64,
}

/// One maximal run of threshold-member indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    /// First index of the run.
    pub start: u64,
    /// Run length.
    pub len: u64,
    /// First non-member index after the run, when it does not exceed `m`.
    /// Runs that reach `n = m` have no good index and are excluded from the
    /// per-block factor product (their omitted factors are at most 1).
    pub good_index: Option<u64>,
}

/// Membership scan of `t` over `n = 1..=m` with its block structure.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub t: BigUint,
    /// Threshold exponent on the 1/64 grid.
    pub k_phi: f64,
    /// Octave index: `2^m <= t < 2^(m+1)`.
    pub m: u64,
    /// `membership[n - 1]` states whether `2^-n t` is within `2^-K` of an
    /// integer, for `n = 1..=m`.
    pub membership: Vec<bool>,
    pub blocks: Vec<Block>,
    /// Number of member indices (the sum of all block lengths).
    pub member_count: u64,
    /// Number of blocks that possess a good index.
    pub good_block_count: u64,
}

/// Per-block verification that the good-index argument is within
/// `2^-(K + len)` of a half-odd integer.
#[derive(Debug, Clone, Serialize)]
pub struct HalfOddReport {
    pub pass: bool,
    pub t: String,
    pub k_phi: f64,
    pub blocks: Vec<HalfOddBlock>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HalfOddBlock {
    pub start: u64,
    pub len: u64,
    pub good_index: u64,
    /// The odd numerator of the nearest half-odd integer `witness / 2`.
    pub witness: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub m: u64,
    #[serde(flatten)]
    pub check: CheckRow,
}

#[derive(Debug, Clone, Serialize)]
pub struct RajchmanReport {
    pub a: u32,
    /// Constant floor `(4 / pi^2) cos^2(pi / a)` for the squared modulus
    /// along `t = a^k`.
    pub floor: f64,
    pub pass: bool,
    pub rows: Vec<RajchmanRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RajchmanRow {
    pub k: u32,
    #[serde(flatten)]
    pub check: CheckRow,
}

/// One scanned argument with its measured modulus and the bounds it must
/// respect.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub t: BigUint,
    pub modulus: f64,
    pub trunc_bound: f64,
    pub theory_bound: f64,
    pub block_envelope_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub const CSV_HEADER: &'static str = "t,modulus,trunc_bound,theory_bound,lemma31_bound";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.t,
                format_f64(row.modulus),
                format_f64(row.trunc_bound),
                format_f64(row.theory_bound),
                format_f64(row.block_envelope_bound),
            ));
        }
        out
    }
}

/// Least-squares decay models for scan tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// Slope of `log |value|` against `log t`, negated.
    PowerLaw,
    /// Slope of `log |value|` against `log log t`, negated.
    LogLaw,
}

/// Rounds a threshold exponent up to the 1/64 grid.
fn grid_k(k_phi: f64) -> f64 {
    (k_phi * 64.0).ceil() / 64.0
}

/// Derives the explicit envelope constants for a classified weight.
///
/// Case 1 chooses `K = max(log2(3), log2(5 pi^2 / (4 (1 - phi^2(2)))) / 2)`;
/// case 2 chooses `K = 3`. Both keep `3 * 2^-K <= 1` and `pi * 2^-K <= 1`.
pub fn derive_constants(spec: &WeightSpec, case_tag: CaseTag) -> Result<DecayConstants> {
    let phi1 = spec.phi(1);
    if phi1 >= 1.0 {
        return Err(Error::RangeViolation("phi(1) must be below 1".into()));
    }
    let k_phi = match case_tag {
        CaseTag::Case1 => {
            let phi2_sq = spec.phi(2).powi(2);
            let k1 = 0.5 * (5.0 * std::f64::consts::PI.powi(2) / (4.0 * (1.0 - phi2_sq))).log2();
            grid_k(k1.max(3f64.log2()))
        }
        CaseTag::Case2 => 3.0,
        CaseTag::Mixed => {
            return Err(Error::PreconditionViolation(
                "no envelope constants exist for mixed-ratio weights".into(),
            ))
        }
    };
    debug_assert!(3.0 * 2f64.powf(-k_phi) <= 1.0);
    debug_assert!(std::f64::consts::PI * 2f64.powf(-k_phi) <= 1.0);

    let delta =
        1.0 - (1.0 - phi1 * phi1) * (std::f64::consts::PI * 2f64.powf(-k_phi)).sin().powi(2);
    let gamma = (-delta.log2() / 2.0).min(1.0 - 1e-6);
    let c = 1.0 + std::f64::consts::PI.powi(2) * 4f64.powf(-k_phi) / (phi1 * phi1);
    let c1 = 1.0 + phi1 * phi1;
    let c2 = 2f64.powf(gamma) * c1.sqrt();
    let final_multiplier = 2.0 * c.sqrt();
    Ok(DecayConstants {
        case_tag,
        k_phi,
        delta,
        gamma,
        c,
        c1,
        c2,
        final_multiplier,
    })
}

/// Evaluates the decay envelope at a real argument `t >= 2`.
pub fn theoretical_bound(consts: &DecayConstants, spec: &WeightSpec, t: f64) -> f64 {
    assert!(t >= 2.0, "envelope is defined for t >= 2");
    match consts.case_tag {
        CaseTag::Case1 => {
            let index = (consts.gamma * t.log2()).ceil().max(1.0) as u64;
            consts.final_multiplier * spec.phi(index)
        }
        CaseTag::Case2 => consts.c2 * t.powf(-consts.gamma),
        CaseTag::Mixed => f64::NAN,
    }
}

/// Exact test of `num / 2^n < 2^-K` with `K = k64 / 64`: both sides are
/// raised to the 64th power, turning the comparison into
/// `num^64 * 2^k64 < 2^(64 n)`.
fn dist_below_threshold(num: &BigUint, n: u64, k64: u64) -> bool {
    if num.is_zero() {
        return true;
    }
    if k64.is_multiple_of(64) {
        (num << (k64 / 64)) < (BigUint::one() << n)
    } else {
        (num.pow(64) << k64) < (BigUint::one() << (64 * n))
    }
}

/// Scans `n = 1..=m` and groups member indices into blocks.
pub fn block_decompose(t: &BigUint, k_phi: f64) -> BlockDecomposition {
    assert!(*t >= BigUint::from(2u32), "argument must be >= 2");
    assert!(
        3.0 * 2f64.powf(-k_phi) <= 1.0,
        "threshold must satisfy 3 * 2^-K <= 1"
    );
    let k_phi = grid_k(k_phi);
    let k64 = (k_phi * 64.0).round() as u64;
    let m = t.bits() - 1;

    let membership: Vec<bool> = (1..=m)
        .map(|n| {
            // dist = min(r, 2^n - r) / 2^n for the low n bits r of t
            let r = t & &((BigUint::one() << n) - 1u32);
            let num = std::cmp::min(r.clone(), (BigUint::one() << n) - &r);
            dist_below_threshold(&num, n, k64)
        })
        .collect();

    let mut blocks = Vec::new();
    let mut n = 1;
    while n <= m {
        if membership[(n - 1) as usize] {
            let start = n;
            while n < m && membership[n as usize] {
                n += 1;
            }
            // the run covers start..=n; when it stops before m, index n + 1
            // is the first non-member after it
            let good_index = if n < m { Some(n + 1) } else { None };
            blocks.push(Block {
                start,
                len: n - start + 1,
                good_index,
            });
        }
        n += 1;
    }

    let member_count = membership.iter().filter(|&&b| b).count() as u64;
    let good_block_count = blocks.iter().filter(|b| b.good_index.is_some()).count() as u64;
    BlockDecomposition {
        t: t.clone(),
        k_phi,
        m,
        membership,
        blocks,
        member_count,
        good_block_count,
    }
}

/// Exactly verifies, block by block, that each good-index argument lies
/// within `2^-(K + len)` of a half-odd integer `witness / 2`.
pub fn verify_half_odd_property(decomp: &BlockDecomposition) -> HalfOddReport {
    let k64 = (decomp.k_phi * 64.0).round() as u64;
    let mut blocks = Vec::new();
    let mut pass = true;
    for block in &decomp.blocks {
        let Some(good) = block.good_index else {
            continue;
        };
        // |t / 2^good - witness / 2| = |2 r - 2^good| / 2^(good + 1)
        // with r the low `good` bits of t
        let r = &decomp.t & ((BigUint::one() << good) - 1u32);
        let half = BigUint::one() << (good - 1);
        let num = if r >= half {
            (&r - &half) << 1u32
        } else {
            (&half - &r) << 1u32
        };
        let witness = ((&decomp.t >> good) << 1u32) + 1u32;
        let ok = dist_below_threshold(&num, good + 1, k64 + 64 * block.len);
        pass &= ok;
        blocks.push(HalfOddBlock {
            start: block.start,
            len: block.len,
            good_index: good,
            witness: witness.to_string(),
            pass: ok,
        });
    }
    HalfOddReport {
        pass,
        t: decomp.t.to_string(),
        k_phi: decomp.k_phi,
        blocks,
    }
}

/// Envelope `delta^(m - k - j) * prod (phi^2(n_i) + pi^2 2^-2(l_i + K))`
/// over the blocks with good indices; an upper bound for the squared
/// modulus of the transform at `t`.
pub fn block_envelope_bound(
    spec: &WeightSpec,
    decomp: &BlockDecomposition,
    consts: &DecayConstants,
) -> Result<f64> {
    if consts.k_phi != decomp.k_phi {
        return Err(Error::PreconditionViolation(format!(
            "constants use K = {} but the decomposition was built with K = {}",
            consts.k_phi, decomp.k_phi
        )));
    }
    let exponent = decomp.m - decomp.member_count - decomp.good_block_count;
    let mut bound = consts.delta.powi(exponent as i32);
    for block in &decomp.blocks {
        let Some(good) = block.good_index else {
            continue;
        };
        let phi_sq = spec.phi(good).powi(2);
        bound *= phi_sq
            + std::f64::consts::PI.powi(2) * 2f64.powf(-2.0 * (block.len as f64 + consts.k_phi));
    }
    Ok(bound)
}

/// Checks `|a + b e(t)| <= a + b - 4 min(a, b) ||t||^2` within a relative
/// slack of `1e-12` (scaled by `a + b`).
pub fn check_modulus_contraction(a: f64, b: f64, t: f64) -> bool {
    assert!(a > 0.0 && b > 0.0, "both coefficients must be positive");
    let frac = t.rem_euclid(1.0);
    let dist = frac.min(1.0 - frac);
    let angle = std::f64::consts::TAU * t;
    let lhs = (a + b * angle.cos()).hypot(b * angle.sin());
    let rhs = a + b - 4.0 * a.min(b) * dist * dist;
    lhs <= rhs + 1e-12 * (a + b)
}

/// Specialization of [`check_modulus_contraction`] to one product factor: verifies
/// `|(1 + phi_n)/2 + (1 - phi_n)/2 e(theta)| <= 1 - 2 (1 - phi_1) ||theta||^2`
/// for a monotone weight (`phi_n <= phi_1`).
pub fn check_factor_contraction(phi_1: f64, phi_n: f64, theta: f64) -> bool {
    assert!(phi_n <= phi_1, "monotonicity gives phi(n) <= phi(1)");
    let frac = theta.rem_euclid(1.0);
    let dist = frac.min(1.0 - frac);
    let a = 0.5 * (1.0 + phi_n);
    let b = 0.5 * (1.0 - phi_n);
    let angle = std::f64::consts::TAU * theta;
    let lhs = (a + b * angle.cos()).hypot(b * angle.sin());
    let rhs = 1.0 - 2.0 * (1.0 - phi_1) * dist * dist;
    lhs <= rhs + 1e-12
}

/// Scans octaves `m_min..=m_max`, sampling `2^m`, `2^(m+1) - 1`, and
/// `samples_per_octave - 2` seeded random integers per octave. Rows are
/// sorted by `t` and are bit-identical for a fixed seed regardless of the
/// rayon thread count.
pub fn decay_scan(
    spec: &WeightSpec,
    m_min: u64,
    m_max: u64,
    samples_per_octave: u64,
    seed: u64,
) -> Result<ScanTable> {
    if !(2 <= m_min && m_min <= m_max) {
        return Err(Error::PreconditionViolation(format!(
            "need 2 <= m_min <= m_max, got {m_min}..{m_max}"
        )));
    }
    if m_max > 62 {
        return Err(Error::RangeViolation(
            "octaves above 62 are not supported".into(),
        ));
    }
    if samples_per_octave < 1 {
        return Err(Error::PreconditionViolation(
            "need at least one sample per octave".into(),
        ));
    }
    let consts = derive_constants(spec, spec.classify_ratio(64))?;

    let mut args: Vec<u64> = Vec::new();
    for m in m_min..=m_max {
        args.push(1 << m);
        if samples_per_octave >= 2 {
            args.push((1 << (m + 1)) - 1);
        }
        for i in 0..samples_per_octave.saturating_sub(2) {
            args.push((1 << m) | (keyed_u64(seed, STREAM_OCTAVE ^ m, i) & ((1 << m) - 1)));
        }
    }

    let mut rows = args
        .into_par_iter()
        .map(|t| -> Result<ScanRow> {
            let big = BigUint::from(t);
            let value = mu_hat(
                spec,
                &RationalArgument::from_integer(t),
                DEFAULT_GUARD_BITS,
                2,
            )?;
            let decomp = block_decompose(&big, consts.k_phi);
            let l31 = block_envelope_bound(spec, &decomp, &consts)?;
            Ok(ScanRow {
                t: big,
                modulus: value.value.norm(),
                trunc_bound: value.truncation_bound,
                theory_bound: theoretical_bound(&consts, spec, t as f64),
                block_envelope_bound: l31,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.t.cmp(&b.t));
    Ok(ScanTable { rows })
}

/// Fits a decay exponent to the scan rows whose modulus rises above their
/// truncation bound; needs at least 8 usable rows.
pub fn fit_decay_exponent(table: &ScanTable, model: FitModel) -> Result<f64> {
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|row| row.modulus > row.trunc_bound)
        .map(|row| {
            let t = row.t.to_f64().unwrap_or(f64::MAX);
            let x = match model {
                FitModel::PowerLaw => t.ln(),
                FitModel::LogLaw => t.ln().ln(),
            };
            (x, row.modulus.ln())
        })
        .collect();
    if points.len() < 8 {
        return Err(Error::PreconditionViolation(format!(
            "only {} rows rise above their truncation bound; need 8",
            points.len()
        )));
    }
    Ok(-ols_slope(&points))
}

pub(crate) fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    sxy / sxx
}

/// Verifies the lower envelope `|transform(2^m)|^2 >= (4/pi^2) phi^2(m+1)`
/// up to the evaluation error.
pub fn lower_bound_check(spec: &WeightSpec, m: u64) -> BoundReport {
    let value = mu_hat_at_pow2(spec, m, DEFAULT_GUARD_BITS);
    let modulus = value.value.norm();
    let lhs = modulus * modulus;
    let rhs = 4.0 / std::f64::consts::PI.powi(2) * spec.phi(m + 1).powi(2);
    // |exact|^2 >= |computed|^2 - bound (2 |computed| + bound)
    let error = value.truncation_bound * (2.0 * modulus + value.truncation_bound);
    let margin = lhs - (rhs - error);
    BoundReport {
        m,
        check: CheckRow {
            pass: lhs >= rhs - error,
            lhs,
            rhs,
            margin,
        },
    }
}

/// Verifies the constant floor `(4/pi^2) cos^2(pi/a)` for the squared
/// modulus of the base-`a` transform along `t = a^k`, `k = 1..=k_max`.
/// Bases `a >= 3` keep this floor positive: such measures do not decay.
pub fn rajchman_check(spec: &WeightSpec, a: u32, k_max: u32) -> Result<RajchmanReport> {
    if a < 3 {
        return Err(Error::PreconditionViolation(format!(
            "the floor needs cos(pi/a) >= cos(pi/3) > 0, so a >= 3; got {a}"
        )));
    }
    let floor =
        4.0 / std::f64::consts::PI.powi(2) * (std::f64::consts::PI / a as f64).cos().powi(2);
    let rows = (1..=k_max)
        .map(|k| -> Result<RajchmanRow> {
            let t = RationalArgument::from_integer(num_bigint::BigInt::from(a).pow(k));
            let value = mu_hat(spec, &t, DEFAULT_GUARD_BITS, a)?;
            let modulus = value.value.norm();
            let lhs = modulus * modulus;
            let error = value.truncation_bound * (2.0 * modulus + value.truncation_bound);
            Ok(RajchmanRow {
                k,
                check: CheckRow {
                    pass: lhs >= floor - error,
                    lhs,
                    rhs: floor,
                    margin: lhs - (floor - error),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.check.pass);
    Ok(RajchmanReport {
        a,
        floor,
        pass,
        rows,
    })
}
