//! Criterion benchmarks for canopy-core; see `benches/simulation.rs`.
