//! Standard-library companion of `qfc-core`: the state text format and the
//! `qfc` command-line front end.

#![warn(missing_docs)]

pub mod cli;
pub mod format;

pub use qfc_core as core;
