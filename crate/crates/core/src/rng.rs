//! Seeded random substreams.
//!
//! Every random quantity is drawn from a ChaCha stream whose seed is a hash of
//! `(master seed, drop, attempt, user, purpose)`. Draws for one user never
//! depend on how many other users, drops or threads exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for. Part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    UserPlacement = 1,
    Rays = 2,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies the random draws of one Monte-Carlo drop attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub master_seed: u64,
    pub drop_index: u64,
    /// Bumped when a singular realization is redrawn.
    pub attempt: u64,
}

impl StreamKey {
    pub fn new(master_seed: u64, drop_index: u64) -> Self {
        Self {
            master_seed,
            drop_index,
            attempt: 0,
        }
    }

    pub fn with_attempt(self, attempt: u64) -> Self {
        Self { attempt, ..self }
    }

    pub fn seed_for(&self, user: usize, purpose: Purpose) -> u64 {
        [self.drop_index, self.attempt, user as u64, purpose as u64]
            .into_iter()
            .fold(splitmix64(self.master_seed), |h, part| splitmix64(h ^ part))
    }

    pub fn rng(&self, user: usize, purpose: Purpose) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed_for(user, purpose))
    }
}
