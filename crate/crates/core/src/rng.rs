//! Counter-based keyed randomness.
//!
//! Every draw is a pure function of `(seed, stream, index)`, so work can be
//! distributed across threads in any order and still reproduce bit-identical
//! results. Streams separate independent uses (digit sampling, octave
//! sampling, sweep inputs) under one user-facing seed.

/// Stream tag for binary digit sampling.
pub const STREAM_DIGITS: u64 = 0x4449_4749_5453_0001;
/// Stream tag for random integers inside a scan octave.
pub const STREAM_OCTAVE: u64 = 0x4f43_5441_5645_0002;
/// Stream tag for randomized verification sweeps.
pub const STREAM_SWEEP: u64 = 0x5357_4545_5000_0003;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform `u64` keyed on `(seed, stream, index)`.
#[inline]
pub fn keyed_u64(seed: u64, stream: u64, index: u64) -> u64 {
    let h = mix(seed ^ 0xa076_1d64_78bd_642f);
    let h = mix(h ^ stream.wrapping_mul(0xe703_7ed1_a0b4_28db));
    mix(h ^ index.wrapping_mul(0x8ebc_6af0_9c88_c6e3))
}

/// Uniform `f64` in `[0, 1)` keyed on `(seed, stream, index)`.
#[inline]
pub fn keyed_unit_f64(seed: u64, stream: u64, index: u64) -> f64 {
    (keyed_u64(seed, stream, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
