//! Seed derivation for independent random streams.
//!
//! Every stochastic operation takes an explicit 64-bit seed. Substreams are
//! derived with a SplitMix64 mix so that (channel, noise, bits, init, shuffle)
//! draws and per-sample streams never overlap.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named substreams hanging off a base seed.
pub mod salt {
    pub const CHANNEL: u64 = 0x6368_616e_6e65_6c00; // "channel"
    pub const NOISE: u64 = 0x6e6f_6973_6500_0000; // "noise"
    pub const BITS: u64 = 0x6269_7473_0000_0000; // "bits"
    pub const INIT: u64 = 0x696e_6974_0000_0000; // "init"
    pub const SHUFFLE: u64 = 0x7368_7566_666c_6500; // "shuffle"
    pub const SPLIT_TRAIN: u64 = 0x7472_6169_6e00_0000; // "train"
    pub const SPLIT_VAL: u64 = 0x7661_6c00_0000_0000; // "val"
    pub const SPLIT_TEST: u64 = 0x7465_7374_0000_0000; // "test"
    pub const AUTOCORR: u64 = 0x6175_746f_636f_7272; // "autocorr"
}

/// SplitMix64 finalizer. Bijective on u64, good avalanche.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from (base, salt).
pub fn mix(base: u64, salt: u64) -> u64 {
    splitmix(base ^ splitmix(salt))
}

/// Derive the seed for element `index` of the stream `(base, salt)`.
pub fn stream(base: u64, salt: u64, index: u64) -> u64 {
    splitmix(mix(base, salt) ^ splitmix(index.wrapping_add(0x5151_5151_5151_5151)))
}

/// Deterministic RNG for a derived seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
