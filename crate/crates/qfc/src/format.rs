//! The state text format.
//!
//! ```text
//! # comment
//! length 2
//! 00 0.7071067811865476 0
//! 11 0.7071067811865476 0
//! ```
//!
//! The first significant line is `length <n>` or the single word `null`.
//! Every further line is `<bits> <re> <im>`; basis strings that do not appear
//! have amplitude zero.  The empty basis string of a length-0 state is
//! written `λ` (`-` is accepted on input).  Floats are written in their
//! shortest round-tripping decimal form, so write → read is bit-exact.

use std::fmt::Write as _;

use qfc_core::{Amp, Bits, State};

/// A malformed state file.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    /// 1-based line number (0 for a missing header).
    pub line: usize,
    /// What went wrong.
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// Renders a state in the text format.
pub fn write_state(phi: &State) -> String {
    if phi.is_null() {
        return "null\n".to_string();
    }
    let mut out = format!("length {}\n", phi.len());
    for (b, a) in phi.iter() {
        let bits = if b.is_empty() {
            "λ".to_string()
        } else {
            b.to_bit_string()
        };
        // Adding +0.0 turns a negative zero into a positive one.
        writeln!(out, "{bits} {} {}", a.re + 0.0, a.im + 0.0).expect("writing to a String");
    }
    out
}

/// Parses the text format.
pub fn read_state(text: &str) -> Result<State, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(0, "missing `length <n>` or `null` header"))?;
    if header == "null" {
        if let Some((i, _)) = lines.next() {
            return Err(err(i, "the null vector has no amplitude lines"));
        }
        return Ok(State::null());
    }
    let n: usize = header
        .strip_prefix("length")
        .filter(|rest| rest.starts_with(char::is_whitespace))
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| err(hline, format!("expected `length <n>` or `null`, found {header:?}")))?;
    if n > qfc_core::qstate::MAX_QUBITS {
        return Err(err(
            hline,
            format!("length {n} exceeds {}", qfc_core::qstate::MAX_QUBITS),
        ));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut items = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [bits, re, im] = fields[..] else {
            return Err(err(i, "expected `<bits> <re> <im>`"));
        };
        let b: Bits = match bits {
            "-" => Bits::EMPTY,
            s => s.parse().map_err(|e| err(i, format!("{e}")))?,
        };
        if b.len() != n {
            return Err(err(i, format!("basis string {bits} does not have length {n}")));
        }
        if !seen.insert(b) {
            return Err(err(i, format!("duplicate basis string {bits}")));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(i, format!("invalid number {s:?}")))
        };
        items.push((b, Amp::new(num(re)?, num(im)?)));
    }
    Ok(State::from_amplitudes(n, items))
}
