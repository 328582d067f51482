//! Seedable counter-based random streams.
//!
//! A master seed fixes a ChaCha key; independent consumers get distinct
//! stream identifiers, so parallel replications never share state and the
//! output does not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream `id` of the generator keyed by `master`.
pub fn stream(master: u64, id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

/// Stream for replication `rep` of experiment `experiment`.
pub fn replication(master: u64, experiment: u32, rep: u32) -> SimRng {
    stream(master, (u64::from(experiment) << 32) | u64::from(rep))
}

/// Derives a fresh generator from an existing one, for auxiliary chains that
/// must not perturb the parent's sequence beyond a single draw.
pub fn fork(rng: &mut SimRng) -> SimRng {
    ChaCha8Rng::seed_from_u64(rng.random())
}

/// Uniform draw on (0, 1].
#[inline]
pub fn open_unit(rng: &mut SimRng) -> f64 {
    1.0 - rng.random::<f64>()
}
