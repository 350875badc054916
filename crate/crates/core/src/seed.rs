//! Hierarchical seed derivation.
//!
//! Every random draw of a simulation comes from a stream addressed by
//! `(seed, trial, subsystem)`. Streams do not depend on the SNR point or on
//! the order trials are scheduled in, so curves for different schemes share
//! the same topologies, data and fades (common random numbers).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random subsystems of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Subsystem {
    Topology = 1,
    Selection = 2,
    Lifting = 3,
    Data = 4,
    Fading = 5,
    Noise = 6,
    ChannelCode = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a path of labels into a child seed.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    derive(seed, &[trial])
}

pub fn subsystem_rng(trial_seed: u64, sub: Subsystem) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(trial_seed, &[sub as u64]))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
