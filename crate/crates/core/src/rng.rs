//! Named random streams derived from one master seed.
//!
//! Every consumer asks for a stream by path, e.g. `scenario/<name>/path/<i>`.
//! The stream seed is `SHA-256(master_le ‖ path)`, so results never depend on
//! thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha20Rng;

pub fn derive_seed(master: u64, path: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(path.as_bytes());
    h.finalize().into()
}

pub fn stream(master: u64, path: &str) -> StreamRng {
    ChaCha20Rng::from_seed(derive_seed(master, path))
}

/// Stream for the `i`-th path of a named ensemble.
pub fn path_stream(master: u64, ensemble: &str, i: usize) -> StreamRng {
    stream(master, &format!("{ensemble}/path/{i}"))
}
