//! Seeded random number streams.
//!
//! Every trial draws from its own ChaCha8 stream: the 64-bit run seed is
//! expanded with `rand_core`'s `seed_from_u64`, and the trial index selects
//! the ChaCha stream id. Streams are independent and can be regenerated in
//! any order, so parallel execution is reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::state::ReserveN;

/// Identifier recorded in reports for the derivation above.
pub const PRNG_ALGORITHM: &str = "chacha8:seed_from_u64(seed),stream=trial";

/// Stream-offset for auxiliary streams (orbit starts, trade lists) so they
/// never collide with per-trial streams.
pub(crate) const AUX_STREAM: u64 = 1 << 63;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws from the log-uniform distribution on `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.gen_range(lo.ln()..=hi.ln()).exp().clamp(lo, hi)
}

/// A state whose coordinates are independently log-uniform on `[lo, hi]`.
pub fn log_uniform_state<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> ReserveN {
    ReserveN::new((0..n).map(|_| log_uniform(rng, lo, hi)).collect())
        .expect("log-uniform coordinates are finite")
}

/// An ordered pair of distinct token indices below `n`.
pub fn token_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}
