//! Deterministic random substreams.
//!
//! Every random draw in a run comes from a ChaCha8 stream keyed by
//! `(seed, iteration, index, purpose)`, so the order in which workers pick
//! up whales cannot change any result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Move = 2,
    LocalSearch = 3,
    Chaos = 4,
    Folds = 5,
    Run = 6,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes the key components into one 64-bit stream seed.
pub fn derive_seed(seed: u64, iteration: u64, index: u64, purpose: Purpose) -> u64 {
    let mut h = splitmix(seed);
    h = splitmix(h ^ iteration);
    h = splitmix(h ^ index.rotate_left(17));
    splitmix(h ^ (purpose as u64).wrapping_mul(GOLDEN))
}

pub fn substream(seed: u64, iteration: u64, index: u64, purpose: Purpose) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, iteration, index, purpose))
}
