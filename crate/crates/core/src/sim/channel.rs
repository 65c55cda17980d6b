//! BSC sampling with separate crossovers for regular and reliable bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::ProtectionMode;
use crate::sim::graph::TannerGraph;

/// SplitMix64 finaliser applied to `master ^ golden * (index + 1)`.
///
/// Trial `t` of a run seeded with `master` uses `trial_seed(master, t)`, so
/// every arm of an experiment sees the same per-trial stream.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Crossover seen by a bit of the given class.
pub fn bit_crossover(mode: ProtectionMode, reliable: bool, p: f64, pbar: f64) -> f64 {
    match (mode, reliable) {
        (_, false) | (ProtectionMode::Uniform, true) => p,
        (ProtectionMode::Udp, true) => pbar,
        (ProtectionMode::Doping, true) => 0.0,
    }
}

/// Fills `word` with the channel output for the all-zero codeword (+1).
///
/// One uniform draw per bit, in bit order, so runs with the same seed and
/// smaller crossovers flip a subset of the bits.
pub fn bsc_sample_into(
    graph: &TannerGraph,
    p: f64,
    pbar: f64,
    mode: ProtectionMode,
    seed: u64,
    word: &mut Vec<i8>,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    word.clear();
    word.extend(graph.reliable.iter().map(|&rel| {
        let u: f64 = rng.gen();
        if u < bit_crossover(mode, rel, p, pbar) {
            -1
        } else {
            1
        }
    }));
}

pub fn bsc_sample(
    graph: &TannerGraph,
    p: f64,
    pbar: f64,
    mode: ProtectionMode,
    seed: u64,
) -> Vec<i8> {
    let mut w = Vec::with_capacity(graph.n);
    bsc_sample_into(graph, p, pbar, mode, seed, &mut w);
    w
}
