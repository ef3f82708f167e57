//! Master-seed expansion.
//!
//! Every random stream in a scene is drawn from its own ChaCha8 generator whose
//! 64-bit seed is derived from the scene's master seed:
//!
//! ```text
//! sub_seed(master, kind, index) = splitmix64(master ^ splitmix64((kind << 32) | index))
//! ```
//!
//! with `kind` = 1 for emitter emission times, 2 for the per-emitter branching
//! and detection decisions and 3 for per-detector dark counts. `index` is the
//! emitter position in the scene or the detector id (R1 = 0, R2 = 1, T1 = 2).
//! Component streams are therefore reproducible in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which component stream a sub-seed feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamKind {
    Emission = 1,
    Branch = 2,
    Dark = 3,
}

/// One SplitMix64 output step applied to `x`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sub_seed(master: u64, kind: StreamKind, index: u32) -> u64 {
    splitmix64(master ^ splitmix64(((kind as u64) << 32) | u64::from(index)))
}

pub(crate) fn rng_for(master: u64, kind: StreamKind, index: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(master, kind, index))
}
