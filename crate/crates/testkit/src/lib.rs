//! Test support: slow reference implementations of the numeric transforms and
//! seeded generators for random tables and specs.

pub mod agree;
pub mod gen;
pub mod oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
