//! Criterion benchmarks for `dsm-core`; see `benches/`.
