//! Benchmark harness crate; see `benches/` for the criterion targets.

pub use rebit_core;
