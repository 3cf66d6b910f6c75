//! Deterministic seed derivation.
//!
//! Every stage of the pipeline draws randomness from its own ChaCha stream,
//! seeded by mixing a master seed with a fixed domain tag and an index.  Runs
//! are therefore reproducible bit for bit regardless of thread count or the
//! order in which work items complete.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keeping unrelated random streams disjoint.
pub mod domain {
    pub const GEN: u64 = 0x67656e5f696e7374; // "gen_inst"
    pub const COUPLINGS: u64 = 0x636f75706c696e67; // "coupling"
    pub const REPAIR: u64 = 0x7265706169725f5f; // "repair__"
    pub const GAUGE: u64 = 0x67617567655f5f5f; // "gauge___"
    pub const NOISE: u64 = 0x6e6f6973655f5f5f; // "noise___"
    pub const CHAIN: u64 = 0x636861696e5f5f5f; // "chain___"
    pub const CLUSTER: u64 = 0x636c75737465725f; // "cluster_"
    pub const READ: u64 = 0x726561645f5f5f5f; // "read____"
    pub const BOOTSTRAP: u64 = 0x626f6f7473747261; // "bootstra"
    pub const BASELINE: u64 = 0x626173656c696e65; // "baseline"
}

/// Finalizer from the splitmix64 generator.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives the seed of a child stream from a master seed, a domain tag, and
/// an index within the domain.
#[inline]
pub fn child_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ tag) ^ index)
}

/// ChaCha stream for a (master, domain, index) triple.
pub fn stream(master: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, tag, index))
}

/// ChaCha stream seeded directly.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
