//! Counter-based random streams. Every draw is addressed by
//! (seed, trial, purpose, index), so results do not depend on evaluation order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a draw is used for; separates the streams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    InfoBits = 1,
    FrozenBits = 2,
    ChannelOutput = 3,
    Measurement = 4,
    Sampling = 5,
}

/// Generator for one trial of an experiment.
#[derive(Clone)]
pub struct TrialRng {
    rng: ChaCha8Rng,
}

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        TrialRng { rng }
    }

    /// Uniform variate in [0, 1) at the given address.
    pub fn uniform(&mut self, purpose: Purpose, index: u64) -> f64 {
        let word = ((purpose as u128) << 64) | ((index as u128) << 1);
        self.rng.set_word_pos(word);
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform bit at the given address.
    pub fn bit(&mut self, purpose: Purpose, index: u64) -> u8 {
        u8::from(self.uniform(purpose, index) >= 0.5)
    }
}

/// Sequential generator for a (seed, stream) pair, for random channel and
/// POVM construction.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
