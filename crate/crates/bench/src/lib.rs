//! Criterion benchmarks for `cgo-core`; the code lives under `benches/`.
