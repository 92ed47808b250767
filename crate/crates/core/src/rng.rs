//! Deterministic random streams.
//!
//! Every sampler in this crate takes an explicit generator. Parallel loops
//! never share a generator: each block of work derives its own stream from
//! `(master seed, stream id)` using the ChaCha stream counter, so results
//! are independent of scheduling and reproducible bit-for-bit given the
//! same seed and block size.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::FRAC_1_SQRT_2;

/// Default number of trials per worker block.
pub const DEFAULT_BLOCK_SIZE: usize = 256;

/// Derive an independent generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for block `block` of phase `phase` of an experiment.
///
/// Phases keep the streams of distinct sampling loops disjoint.
pub fn block_stream(phase: u64, block: u64) -> u64 {
    (phase << 32) | block
}

/// Standard complex Gaussian: `E|z|^2 = 1`, so Re and Im each have
/// variance 1/2.
pub fn complex_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Vector of iid standard complex Gaussians.
pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| complex_standard_normal(rng)).collect()
}

/// Split `trials` into blocks of at most `block_size` and map each block in
/// parallel with its own derived stream. The output is ordered by block id,
/// so any later reduction is deterministic.
pub fn map_blocks<T, F>(
    seed: u64,
    phase: u64,
    trials: usize,
    block_size: usize,
    f: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha12Rng, std::ops::Range<usize>) -> T + Sync,
{
    assert!(block_size > 0, "block size must be positive");
    let n_blocks = trials.div_ceil(block_size);
    (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * block_size;
            let hi = (lo + block_size).min(trials);
            let mut rng = stream_rng(seed, block_stream(phase, b as u64));
            f(&mut rng, lo..hi)
        })
        .collect()
}
