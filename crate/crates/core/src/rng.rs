//! Seed derivation for reproducible runs.
//!
//! Every random decision in a run is driven by a `ChaCha8Rng` whose seed is
//! derived from the run seed plus a purpose tag, so results do not depend on
//! thread scheduling or on how members are multiplexed over workers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domains that consume randomness, mixed into derived seeds so streams
/// never collide across purposes.
#[derive(Debug, Clone, Copy)]
pub enum SeedDomain {
    /// Population sampling at the master.
    Sampling,
    /// Episode randomness (track layout, start pose).
    Episode,
    /// Inverse-dynamics model training (shuffling, subsampling).
    IdmTrain,
    /// Network weight initialization.
    NetInit,
    /// Held-out split selection.
    HoldoutSplit,
}

impl SeedDomain {
    fn tag(self) -> u64 {
        match self {
            SeedDomain::Sampling => 0x5a4d_504c,
            SeedDomain::Episode => 0x4550_4953,
            SeedDomain::IdmTrain => 0x4944_4d54,
            SeedDomain::NetInit => 0x4e45_5449,
            SeedDomain::HoldoutSplit => 0x484f_4c44,
        }
    }
}

/// splitmix64 finalizer; cheap and well-distributed for seed mixing.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a run seed, a domain, and up to two indices
/// (generation, member, ...). The same inputs always give the same seed.
pub fn derive_seed(run_seed: u64, domain: SeedDomain, a: u64, b: u64) -> u64 {
    mix(mix(mix(run_seed ^ domain.tag()).wrapping_add(a)).wrapping_add(b.wrapping_mul(0x100_0001)))
}

/// A deterministic RNG for the given derived seed.
pub fn rng_for(run_seed: u64, domain: SeedDomain, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(run_seed, domain, a, b))
}
