//! Seed derivation and per-phase random streams.
//!
//! Every coin uses ChaCha8 (`rand_chacha::ChaCha8Rng`). A trial seed is
//! derived from the master seed and the trial index with the SplitMix64
//! finalizer, and each phase of a run draws from its own ChaCha stream
//! (`set_stream`) keyed by the trial seed. The rough-search stream therefore
//! depends only on `(seed, phase)`, never on ε.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers for the independent phases of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    RoughSearch = 1,
    Refinement = 2,
    Classical = 3,
    LemmaSweep = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index` of a run started from `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Independent generator for one phase of a run.
pub fn stream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
