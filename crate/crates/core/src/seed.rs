//! Seed hierarchy: one root seed fans out into independent per-purpose streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purposes that draw randomness. Each gets its own derived stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Split,
    Sampler,
    Init,
    Synth,
    RowShuffle,
    ColumnShuffle,
    Gradcheck,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Split => 0x5350_4c49,
            Purpose::Sampler => 0x5341_4d50,
            Purpose::Init => 0x494e_4954,
            Purpose::Synth => 0x5359_4e54,
            Purpose::RowShuffle => 0x5253_4846,
            Purpose::ColumnShuffle => 0x4353_4846,
            Purpose::Gradcheck => 0x4752_4144,
        }
    }
}

/// splitmix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and an index.
pub fn child(parent: u64, index: u64) -> u64 {
    mix(parent ^ mix(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn derive(root: u64, purpose: Purpose) -> u64 {
    child(root, purpose.tag())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(root: u64, purpose: Purpose) -> ChaCha8Rng {
    rng(derive(root, purpose))
}
