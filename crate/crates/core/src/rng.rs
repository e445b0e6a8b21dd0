//! Seed derivation and deterministic trial partitioning.
//!
//! Trials are cut into fixed-size blocks. Each block draws from its own ChaCha
//! stream keyed by `(seed, stream)`, and block results are combined in block
//! order, so outputs do not depend on how many worker threads run the blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Trials per block.
pub const BLOCK: usize = 1024;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for block `block` of experiment component `component`.
pub fn stream_id(component: u64, block: u64) -> u64 {
    (component << 32) | (block & 0xffff_ffff)
}

/// Run `trials` trials split into blocks on `workers` threads (0 means rayon's
/// default). `f(rng, start, len)` handles one block; results come back in block order.
pub fn run_blocks<T, F>(
    workers: usize,
    seed: u64,
    component: u64,
    trials: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize, usize) -> Result<T> + Sync + Send,
{
    let blocks = trials.div_ceil(BLOCK);
    let job = || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK;
                let len = BLOCK.min(trials - start);
                let mut rng = stream_rng(seed, stream_id(component, b as u64));
                f(&mut rng, start, len)
            })
            .collect::<Result<Vec<T>>>()
    };
    with_workers(workers, job)
}

/// Run `job` inside a pool with the requested thread count.
pub fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return job();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    pool.install(job)
}
