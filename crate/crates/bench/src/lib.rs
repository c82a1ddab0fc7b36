//! Criterion benchmarks for `symflow-core`; see `benches/`.
