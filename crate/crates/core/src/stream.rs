//! Per-trajectory random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed and positioned on
//! its own 64-bit stream id, so two indices never share output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use num_complex::Complex64;

pub type Stream = ChaCha8Rng;

/// Stream id reserved for the shared realization of frozen-disorder runs.
pub const FROZEN_STREAM: u64 = u64::MAX;

pub fn seed_stream(master_seed: u64, trajectory_index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trajectory_index);
    rng.set_word_pos(0);
    rng
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian with independent parts of variance `var` each.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = var.sqrt();
    Complex64::new(s * normal(rng), s * normal(rng))
}
