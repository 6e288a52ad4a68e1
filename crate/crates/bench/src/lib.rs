//! Criterion benchmarks for the receiver front-ends; see `benches/`.
