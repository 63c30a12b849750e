//! Library half of the command-line front end: scene-file handling and
//! deterministic output emission. The binary in `main.rs` wires these into
//! subcommands.

// Validation deliberately writes `!(x > 0.0)` so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
