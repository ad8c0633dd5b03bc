use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Seed plus substream id. Equal pairs give equal draw sequences on every
/// platform; ChaCha keeps substreams independent, so work split by
/// substream can run in any order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Substream `stream ⊕ index`, used for per-column generation.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream ^ index,
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
