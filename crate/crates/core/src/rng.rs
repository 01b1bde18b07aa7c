//! Seeded randomness.
//!
//! Every randomized API in this crate takes an explicit `u64` seed and runs a
//! ChaCha12 stream keyed from it, so output is bit-identical across runs and
//! platforms. Independent substreams are derived with [`split_seed`], a
//! SplitMix64 mix of the parent seed and a stream index; parallel sampling
//! hands each trial its own split seed instead of sharing generator state.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// The generator used throughout the crate.
pub type SeededRng = ChaCha12Rng;

/// Creates the crate's standard generator from a bare seed.
pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derives an independent child seed for substream `stream`.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    // SplitMix64 finalizer over the combined state.
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian sample (independent N(0,1) real and imaginary parts).
pub fn complex_gaussian(rng: &mut SeededRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_seeds_differ() {
        let s = 42;
        let children: Vec<u64> = (0..16).map(|k| split_seed(s, k)).collect();
        for i in 0..children.len() {
            for j in (i + 1)..children.len() {
                assert_ne!(children[i], children[j]);
            }
        }
    }

    #[test]
    fn deterministic_stream() {
        let mut a = rng_from_seed(7);
        let mut b = rng_from_seed(7);
        for _ in 0..32 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }
}
