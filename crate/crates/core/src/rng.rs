//! Seed derivation. Every trajectory owns two ChaCha8 streams keyed by
//! `(master_seed, index)`: one for Wiener increments, one for ancilla
//! measurements.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const NOISE_STREAM: u64 = 0;
const MEASURE_STREAM: u64 = 1;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a master seed and a path of indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &x| splitmix64(acc ^ splitmix64(x)))
}

pub fn trajectory_seed(master: u64, index: u64) -> u64 {
    derive_seed(master, &[index])
}

/// `(noise, measurement)` generators for one trajectory.
pub fn trajectory_rngs(master: u64, index: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let seed = trajectory_seed(master, index);
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(NOISE_STREAM);
    let mut measure = ChaCha8Rng::seed_from_u64(seed);
    measure.set_stream(MEASURE_STREAM);
    (noise, measure)
}
