//! Seeded randomness used by every sampled experiment.
//!
//! The generator is SplitMix64: a 64-bit state advanced by `0x9e3779b97f4a7c15`
//! per draw and finalised with the usual two multiply-xorshift steps. A
//! `w`-bit word is the low `w` bits of one draw. Independent substreams are
//! seeded with the first output of a SplitMix64 started at
//! `master ^ (stream * 0x9e3779b97f4a7c15)`, so results depend only on the
//! master seed and the stream index, never on how work is split across
//! threads.

use rand::{RngCore, SeedableRng};
pub use rand_xoshiro::SplitMix64;

use crate::arx::WordSpec;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn derive_seed(master: u64, stream: u64) -> u64 {
    seeded(master ^ stream.wrapping_mul(GOLDEN_GAMMA)).next_u64()
}

pub fn substream(master: u64, stream: u64) -> SplitMix64 {
    seeded(derive_seed(master, stream))
}

#[inline]
pub fn word(rng: &mut impl RngCore, spec: WordSpec) -> u32 {
    rng.next_u64() as u32 & spec.mask()
}

/// Uniform integer with `bits` random bits, `bits <= 64`.
#[inline]
pub fn bits(rng: &mut impl RngCore, bits: u32) -> u64 {
    if bits == 0 {
        0
    } else {
        rng.next_u64() >> (64 - bits)
    }
}
