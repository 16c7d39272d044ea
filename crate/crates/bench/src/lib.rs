//! Criterion benchmarks for `renyi-core`; see `benches/`.
