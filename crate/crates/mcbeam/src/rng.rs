//! Seed discipline. One experiment seed fans out into independent ChaCha8
//! streams so that, e.g., changing the coordinate schedule cannot perturb the
//! channel draw:
//!
//! * stream 0 — channel generation (`model::generate_instance`)
//! * stream 1 — coordinate schedules (`solvers`)
//! * stream 2 — initializer perturbations (`model::feasible_init`)

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STREAM_INSTANCE: u64 = 0;
const STREAM_SCHEDULE: u64 = 1;
const STREAM_INIT: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for channel realizations.
pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_INSTANCE)
}

/// Generator for coordinate-sampling schedules.
pub fn schedule_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_SCHEDULE)
}

/// Generator for feasible-initializer perturbation retries.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_INIT)
}
