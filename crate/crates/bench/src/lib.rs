//! This crate exists only to host the Criterion benchmarks in `benches/`.
//! Run them with `cargo bench -p spectral-benches`.
