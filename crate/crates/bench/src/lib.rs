//! Criterion benchmarks for the solvers; see `benches/algorithms.rs`.
