//! Deterministic child random streams derived from one root seed.
//!
//! Every consumer of randomness (the prior sampler for a given trial, the
//! cross-validation shuffle for a given training attempt) gets its own
//! ChaCha stream, so the result of any one draw never depends on how many
//! draws some other consumer made, nor on the order in which parallel
//! workers run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Sampling,
    CrossValidation,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Sampling => 0x5348_4143_5f53_414d,
            Purpose::CrossValidation => 0x5348_4143_5f43_5656,
        }
    }
}

/// Stream `index` of the family `purpose` under `seed`.
pub fn child_rng(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.tag());
    rng.set_stream(index);
    rng
}
