//! Reproducible random substreams.
//!
//! Every stream is a pure function of `(master seed, stage name, index)`:
//! the stage name and master seed are hashed into a ChaCha key and the index
//! selects the ChaCha stream. Work split into indexed chunks therefore draws
//! the same numbers no matter how many threads process the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self, stage: &str, index: u64) -> StreamRng {
        let mut hasher = Sha256::new();
        hasher.update(self.master.to_le_bytes());
        hasher.update((stage.len() as u64).to_le_bytes());
        hasher.update(stage.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }

    /// A child tree, for handing a whole subsystem its own namespace.
    pub fn child(&self, stage: &str, index: u64) -> SeedTree {
        use rand::RngCore;
        SeedTree::new(self.stream(stage, index).next_u64())
    }
}
