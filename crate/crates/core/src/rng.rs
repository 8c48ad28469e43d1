//! Seeded, named random streams.
//!
//! A stream is identified by `(seed, label, index)` and hashed into a ChaCha20
//! key, so each trajectory, pair or root owns an independent generator and
//! parallel runs reproduce serial ones bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha20Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub label: String,
    pub index: u64,
}

impl RngSpec {
    pub fn new(seed: u64, label: impl Into<String>, index: u64) -> Self {
        Self {
            seed,
            label: label.into(),
            index,
        }
    }

    pub fn root(seed: u64) -> Self {
        Self::new(seed, "root", 0)
    }

    /// A sub-stream; distinct `(label, index)` pairs never share draws with the parent.
    pub fn child(&self, label: &str, index: u64) -> Self {
        Self {
            seed: self.seed,
            label: format!("{}#{}/{}", self.label, self.index, label),
            index,
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut h = Sha256::new();
        h.update(b"redi-stream-v1");
        h.update(self.seed.to_le_bytes());
        h.update((self.label.len() as u64).to_le_bytes());
        h.update(self.label.as_bytes());
        h.update(self.index.to_le_bytes());
        ChaCha20Rng::from_seed(h.finalize().into())
    }
}

/// Inverse-CDF draw from nonnegative weights (not necessarily normalized).
///
/// Zero-weight entries are never returned.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
