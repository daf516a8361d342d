//! Seeded substreams.
//!
//! Every random quantity is drawn from a ChaCha stream keyed by
//! `(seed, domain)` and selected by a record index, so results do not depend
//! on iteration order or thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent purposes get independent keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Privatize = 1,
    SynthInput = 2,
    SynthResponse = 3,
    FoldSubsample = 4,
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for record `index` under `(seed, domain)`.
pub fn substream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let key = mix(seed ^ mix(domain as u64).rotate_left(17));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Uniform draw strictly inside (0, 1).
pub fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
