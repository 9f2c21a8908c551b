//! Support library for the `fmm` binary.
//!
//! The command-line entry point lives in `main.rs`; this crate root exposes
//! the pieces that are useful on their own, so integration tests can build
//! the same inputs the binary builds:
//!
//! - [`expr`]: the textual grammars for algorithms, recursion plans, scaling
//!   specifications, and level lists;
//! - [`dist`]: the random input distributions used by `gen` and the error
//!   benchmark.

pub mod dist;
pub mod expr;
