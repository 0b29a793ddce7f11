//! Performance benchmarks for the decoder library.
//!
//! This crate carries no library code of its own; see `benches/` for the
//! Criterion targets. `decoder` times a single decode call across lattice
//! sizes, metric variants, and matching engines; `pipeline` times the
//! sampling and estimation layers wrapped around it. Run with
//! `cargo bench -p hdrg-bench`.
