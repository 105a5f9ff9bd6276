//! Criterion benchmarks for the kernel, solver and eigensolver hot paths; see `benches/`.
