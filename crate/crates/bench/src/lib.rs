//! Benchmarks for the solver and certification pipeline; see `benches/`.
