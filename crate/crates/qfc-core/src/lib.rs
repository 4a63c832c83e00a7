//! Core of the qfc quantum-function calculus.
//!
//! * [`qstate`] — sparse variable-length states and the bra/ket algebra;
//! * [`codec`] — 3-bit symbol codes, tilde/bin encodings, code/data parsing;
//! * [`schema`] — the term language: AST, parser, renderer, validation,
//!   complexity and structural inversion;
//! * [`eval`] — the interpreter;
//! * [`stdlib`] — builders for the standard constructions;
//! * [`oracle`] — dense-matrix reference machinery and term fuzzing;
//! * [`demos`] — exhaustive contract checks of the standard algorithms.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod codec;
pub mod demos;
pub mod eval;
pub mod oracle;
pub mod qstate;
pub mod schema;
pub mod stdlib;

pub use qstate::{Amp, Bits, State};
