//! Benchmark harness package; see `benches/main.rs` for the measurements.
