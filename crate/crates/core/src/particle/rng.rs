use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Words of the ChaCha stream reserved per counter value: one normal takes
/// two `u64` draws.
const WORDS_PER_DRAW: u128 = 4;

/// The noise of one particle: ChaCha8 keyed by the run seed, with the
/// particle's stream id as the ChaCha stream. Draw `c` always reads words
/// `4c .. 4c + 4`, so values depend only on `(seed, stream, c)`.
#[derive(Debug, Clone)]
pub struct ParticleStream {
    rng: ChaCha8Rng,
    counter: u64,
}

impl ParticleStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, counter: 0 }
    }

    /// Jump to draw `counter`.
    pub fn seek(&mut self, counter: u64) {
        self.counter = counter;
        self.rng.set_word_pos(counter as u128 * WORDS_PER_DRAW);
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Two uniforms in `(0, 1]` from the current draw, then advance.
    pub fn uniform_pair(&mut self) -> (f64, f64) {
        let a = unit(self.rng.next_u64());
        let b = unit(self.rng.next_u64());
        self.counter += 1;
        (a, b)
    }

    /// A standard normal by Box-Muller (cosine branch only).
    pub fn normal(&mut self) -> f64 {
        let (u1, u2) = self.uniform_pair();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn uniform(&mut self) -> f64 {
        self.uniform_pair().0
    }
}

/// Top 53 bits mapped to `(0, 1]`.
fn unit(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}
