//! Criterion benchmarks for enumeration, canonicalization and class-group
//! sweeps live in `benches/`.
