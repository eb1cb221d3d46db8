//! Reproducible random substreams.
//!
//! A [`RandomStream`] is a `(seed, label)` pair. The seed keys a ChaCha
//! generator and the label selects one of its 2^64 independent streams, so
//! the design optimizer can hand every candidate `m` its own sequence without
//! any coordination between workers.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// The generator behind every stream.
pub type StreamRng = ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub label: u64,
}

impl RandomStream {
    pub fn new(seed: u64, label: u64) -> Self {
        Self { seed, label }
    }

    /// Same seed, different label.
    pub fn substream(&self, label: u64) -> Self {
        Self {
            seed: self.seed,
            label,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.label);
        rng
    }
}
