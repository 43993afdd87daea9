//! Benchmark harness for `magic-bcs`; see `benches/`.
