//! Seeded random streams. Each consumer of randomness gets its own ChaCha
//! stream so that, for example, the plant noise is identical across
//! controller variants run with the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    PlantNoise = 1,
    NetworkInit = 2,
    Sampling = 3,
    Training = 4,
    Diagnostics = 5,
    Fuzz = 6,
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
