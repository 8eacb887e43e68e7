//! Seed derivation.
//!
//! Every random object is keyed by a path of integers below a master seed,
//! for example `[replicate, coordinate]`. The path is folded into a 64-bit
//! child seed with the SplitMix64 finalizer, and the child seed keys a
//! ChaCha8 stream. Replicate `r` can therefore be rebuilt on its own,
//! independent of how many other replicates ran or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep streams for different purposes apart.
pub mod tag {
    pub const GFAURE: u64 = 0x6766_6175_7265;
    pub const NESTED: u64 = 0x6e65_7374_6564;
    pub const AFFINE: u64 = 0x6166_6669_6e65;
    pub const REPLICATE: u64 = 0x7265_706c;
    pub const MONTE_CARLO: u64 = 0x6d63;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn child_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_for(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, path))
}
