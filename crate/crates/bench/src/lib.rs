//! Shared fixtures for the criterion benches.

use jep_core::{enumerate_states, MemorylessFamily, ParticleConfig, TruncatedStateSpace};

/// Avoid-sets with `len` elements spread over `[0, 4 len)`.
pub fn spread_sets(len: usize, count: usize) -> Vec<ParticleConfig> {
    (0..count)
        .map(|k| {
            let heights: Vec<u64> = (0..len as u64)
                .map(|i| 4 * i + (k as u64 + i) % 4)
                .collect();
            ParticleConfig::new(heights).expect("strictly increasing")
        })
        .collect()
}

/// Memoryless family and state space sized so truncation stays below 1e-9.
pub fn memoryless_setup(
    n: usize,
    alpha: f64,
    h_max: u64,
) -> (MemorylessFamily, TruncatedStateSpace) {
    (
        MemorylessFamily::new(alpha).expect("alpha in (0,1)"),
        enumerate_states(n, h_max).expect("valid space"),
    )
}
