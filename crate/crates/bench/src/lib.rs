//! Criterion benchmarks for holocrb; see `benches/`.
