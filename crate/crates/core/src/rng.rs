//! Deterministic random streams.
//!
//! Every Monte Carlo run owns one ChaCha8 stream keyed by the master seed and
//! a 64-bit stream id. ChaCha supports 2^64 independent streams per key, so
//! distinct `(grid index, run index)` pairs can never share randomness and the
//! results do not depend on which thread executes which run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream id reserved for a network shared by every run of a sweep.
pub const SHARED_NETWORK_STREAM: u64 = u64::MAX;

pub fn stream(master_seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream id for run `run` at grid point `grid`.
pub fn run_stream_id(grid: u32, run: u32) -> u64 {
    (u64::from(grid) << 32) | u64::from(run)
}

pub fn run_stream(master_seed: u64, grid: u32, run: u32) -> SimRng {
    stream(master_seed, run_stream_id(grid, run))
}
