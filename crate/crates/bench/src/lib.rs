//! Benchmarks for the reconstruction pipeline live under `benches/`.
