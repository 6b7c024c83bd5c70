//! Shared corpus builders for the pipeline benchmarks.
//!
//! Benchmarks run against the bundled demo table at fixed sizes so numbers
//! are comparable across machines and commits.

use synthmia::dataset::{Dataset, Record};
use synthmia::features::{generate_queries, QuerySet};
use synthmia::fixture::demo_dataset;

pub const BENCH_SEED: u64 = 0xbe7c;

/// The demo table at benchmark scale, quantile-binned to 20 levels.
pub fn corpus(n: usize) -> Dataset {
    demo_dataset(n, BENCH_SEED, 20).expect("demo corpus builds")
}

/// A benchmark target record and its query set.
pub fn target_queries(d: &Dataset, budget: usize) -> (Record, QuerySet) {
    let target = d.record(d.len() / 2);
    let q = generate_queries(d.schema(), &target, budget, BENCH_SEED).expect("queries build");
    (target, q)
}
