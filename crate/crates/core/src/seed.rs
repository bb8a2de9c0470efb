//! Deterministic seeding.
//!
//! Every trial owns its generator. The generator is derived from a
//! `(base seed, trial index)` pair, and experiments derive their base seed
//! from the user seed and the experiment name, so results never depend on
//! how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// `(base seed, trial index)`, which fully determines one trial's randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub base: u64,
    pub trial: u64,
}

impl SeedSpec {
    pub fn new(base: u64, trial: u64) -> Self {
        Self { base, trial }
    }

    /// Seed of an experiment's trial: `hash64(base, name, trial)`.
    pub fn for_experiment(base: u64, experiment: &str, trial: u64) -> Self {
        Self {
            base: hash64(base, experiment),
            trial,
        }
    }

    pub fn rng(&self) -> TrialRng {
        ChaCha8Rng::seed_from_u64(splitmix64(self.base ^ splitmix64(self.trial.wrapping_add(1))))
    }

    /// An independent sub-stream of this trial, e.g. for a second sampler.
    pub fn substream(&self, tag: u64) -> SeedSpec {
        SeedSpec {
            base: splitmix64(self.base ^ tag.wrapping_mul(0xA24B_AED4_963E_E407)),
            trial: self.trial,
        }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a seed and a label (FNV-1a folded through splitmix).
pub fn hash64(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(seed ^ splitmix64(h))
}
