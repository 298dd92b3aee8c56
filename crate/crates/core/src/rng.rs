//! Random streams.
//!
//! Every sampler takes its randomness from a [`Stream`]: a ChaCha8 generator
//! keyed by hashing `(seed, stream id)`. Independent work items use distinct
//! stream ids, so Monte Carlo batches can be split across workers and merged
//! in any order with identical results.

use rand::distributions::{Distribution, OpenClosed01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> Stream {
    let mut seed_state = seed;
    let mut stream_state = stream ^ 0xD1B5_4A32_D192_ED03;
    let mut state = splitmix64(&mut seed_state) ^ splitmix64(&mut stream_state).rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

const REFINE_BELOW: f64 = 1.0 / 4_294_967_296.0; // 2^-32

/// Uniform on `(0, 1]` with resolution far below `2^-53` near zero.
///
/// A draw that lands in `(0, 2^-32]` is uniform there, so it is replaced by a
/// fresh draw rescaled into that interval. This keeps inversion sampling
/// faithful for tail probabilities down to the subnormal range.
pub fn fine_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let mut scale = 1.0;
    for _ in 0..30 {
        let u: f64 = OpenClosed01.sample(rng);
        if u > REFINE_BELOW {
            return u * scale;
        }
        scale *= REFINE_BELOW;
    }
    scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, 0).gen();
        let b: u64 = stream(7, 0).gen();
        let c: u64 = stream(7, 1).gen();
        let d: u64 = stream(8, 0).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn fine_uniform_in_range() {
        let mut rng = stream(1, 2);
        let mut mean = 0.0;
        for _ in 0..100_000 {
            let u = fine_uniform(&mut rng);
            assert!(u > 0.0 && u <= 1.0);
            mean += u;
        }
        mean /= 100_000.0;
        assert!((mean - 0.5).abs() < 0.01);
    }
}
