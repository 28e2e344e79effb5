//! Criterion benchmarks for `ndslab`; see `benches/checks.rs`.
