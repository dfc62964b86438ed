//! Deterministic stream derivation for reproducible parallel replicas.
//!
//! Every sampler in the workspace draws from a `ChaCha8Rng` whose seed is a
//! SHA-256 digest of (master seed, label path). Replicas, experiments and grid
//! points get disjoint streams regardless of scheduling order, so merging
//! per-replica records in any order reproduces the same numbers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive an independent RNG from a master seed and a label path.
///
/// `labels` should name the experiment, grid point and replica, e.g.
/// `&["tree", "phase-scan", "0", "17"]`-style paths built via [`StreamId`].
pub fn derive_rng(master: u64, labels: &[&str]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for l in labels {
        h.update([0xff]); // domain separator between labels
        h.update(l.as_bytes());
    }
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// Builder for hierarchical stream labels.
#[derive(Clone, Debug, Default)]
pub struct StreamId {
    parts: Vec<String>,
}

impl StreamId {
    pub fn new(root: &str) -> Self {
        StreamId { parts: vec![root.to_string()] }
    }

    pub fn child(&self, part: impl ToString) -> Self {
        let mut parts = self.parts.clone();
        parts.push(part.to_string());
        StreamId { parts }
    }

    pub fn rng(&self, master: u64) -> ChaCha8Rng {
        let refs: Vec<&str> = self.parts.iter().map(|s| s.as_str()).collect();
        derive_rng(master, &refs)
    }
}
