//! Shared fixtures for the benchmarks.

use mrfq_core::{exact_joint, random_model, sample_exact, RandomModelSpec, RowHistogram, SampleSet};

/// Exact samples from a seeded random model.
pub fn random_samples(n: usize, r: usize, d: usize, m: usize, seed: u64) -> SampleSet {
    let model = random_model(&RandomModelSpec::new(n, r, d, 0.4, 0.8), seed).expect("feasible spec");
    let table = exact_joint(&model).expect("small enough for exact sampling");
    sample_exact(&table, m, seed ^ 0x9e37)
}

pub fn histogram(n: usize, r: usize, d: usize, m: usize, seed: u64) -> RowHistogram {
    RowHistogram::new(&random_samples(n, r, d, m, seed))
}

/// Deterministic pseudo-random values in `[0, 1)`.
pub fn spread_values(len: usize) -> Vec<f64> {
    (0..len).map(|i| ((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 11) as f64 / (1u64 << 53) as f64).collect()
}
