//! Criterion benchmarks for qpse-core; see `benches/`.
