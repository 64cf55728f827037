//! Criterion benchmarks for the `entbounds` crate; see `benches/`.
