use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cells::{mix64, GOLDEN_GAMMA};

/// Independent generator for `(seed, purpose, index)`.
pub fn substream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let key = mix64(seed ^ mix64(purpose.wrapping_mul(GOLDEN_GAMMA) ^ mix64(index.wrapping_add(GOLDEN_GAMMA))));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(purpose);
    rng
}

pub mod purpose {
    pub const ROOTS: u64 = 1;
    pub const DGW: u64 = 2;
    pub const DTREE: u64 = 3;
    pub const LINE_BALLS: u64 = 4;
    pub const TRANSPORT: u64 = 5;
    pub const SURVIVAL: u64 = 6;
}
