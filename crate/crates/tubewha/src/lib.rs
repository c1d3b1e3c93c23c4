//! Std side of tubewha: category spec files, the F-symbol data format,
//! structure-constant dumps, manifest-bearing reports, and the commands
//! behind the `tubewha` binary.

pub mod category;
pub mod commands;
pub mod dump;
pub mod report;

pub use tubewha_core as core;
