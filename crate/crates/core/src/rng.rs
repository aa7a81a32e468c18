//! Seeded, splittable random streams.
//!
//! Every consumer of randomness derives its generator from the single user
//! seed plus a fixed label (and optionally an index), so stages never share
//! state and results do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::fnv1a;

pub type StreamRng = ChaCha8Rng;

/// Generator for the stream `label` of `seed`.
pub fn stream(seed: u64, label: &str) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(label.as_bytes()));
    rng
}

/// Generator for the `index`-th member of a labelled family, e.g. one trial
/// of an ensemble.
pub fn indexed_stream(seed: u64, label: &str, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(fnv1a(label.as_bytes()).wrapping_add(index));
    rng
}
