//! Counter-based, splittable random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(master seed, domain, index)`. The domain separates independent uses of
//! the same seed (trials, the fixed-matrix draw, outage sampling...). The
//! index is normally the trial number, so results never depend on how trials
//! are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains used by the harness.
pub mod domain {
    pub const TRIAL: u64 = 0;
    pub const FIXED_MATRIX: u64 = 1;
    pub const ACTIVITY: u64 = 2;
    pub const TAIL: u64 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn rng(&self, domain: u64, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.master ^ splitmix64(domain)));
        rng.set_stream(index);
        rng
    }

    /// A child seed, e.g. one per sweep point.
    pub fn derive(&self, index: u64) -> u64 {
        splitmix64(self.master.wrapping_add(splitmix64(index.wrapping_add(0x5EED))))
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
