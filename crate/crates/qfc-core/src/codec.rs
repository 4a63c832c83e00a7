//! Binary encodings: 3-bit symbol codes, tilde encodings, the lexicographic
//! number/string correspondence, and code/data parsing against a separator.

use alloc::collections::BTreeSet;
use core::fmt;

use crate::qstate::{Bits, State};

/// Errors raised by the codec.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    /// A symbol code did not have width 3 (every 3-bit string is a code).
    #[error("unknown-code: {0} is not a 3-bit symbol code")]
    UnknownCode(Bits),
    /// `bin_k(k, n)` was asked for an index outside `[1, 2^k]`.
    #[error("undefined-index: bin_{k}({n}) is not defined")]
    UndefinedIndex {
        /// Width.
        k: usize,
        /// Requested index.
        n: u128,
    },
}

/// The eight encodable symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// `0` ↦ 000.
    Zero,
    /// `1` ↦ 001.
    One,
    /// Blank `B` ↦ 010.
    Blank,
    /// Ending `⊣` ↦ 011.
    End,
    /// `2` (end marker) ↦ 111.
    Two,
    /// Head `H` ↦ 100.
    Head,
    /// Separator `S` ↦ 110.
    Sep,
    /// Time `T` ↦ 101.
    Time,
}

impl Symbol {
    /// All symbols in table order.
    pub const ALL: [Symbol; 8] = [
        Symbol::Zero,
        Symbol::One,
        Symbol::Blank,
        Symbol::End,
        Symbol::Two,
        Symbol::Head,
        Symbol::Sep,
        Symbol::Time,
    ];

    /// The symbol for a bit.
    pub fn of_bit(b: bool) -> Symbol {
        if b {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::Zero => "0",
            Symbol::One => "1",
            Symbol::Blank => "B",
            Symbol::End => "⊣",
            Symbol::Two => "2",
            Symbol::Head => "H",
            Symbol::Sep => "S",
            Symbol::Time => "T",
        })
    }
}

/// The 3-bit code of a symbol.
pub fn hat_encode(s: Symbol) -> Bits {
    let v = match s {
        Symbol::Zero => 0b000,
        Symbol::One => 0b001,
        Symbol::Blank => 0b010,
        Symbol::End => 0b011,
        Symbol::Two => 0b111,
        Symbol::Head => 0b100,
        Symbol::Sep => 0b110,
        Symbol::Time => 0b101,
    };
    Bits::new(3, v)
}

/// The symbol of a 3-bit code.
pub fn hat_decode(code: &Bits) -> Result<Symbol, CodecError> {
    if code.len() != 3 {
        return Err(CodecError::UnknownCode(*code));
    }
    Symbol::ALL
        .into_iter()
        .find(|s| hat_encode(*s) == *code)
        .ok_or(CodecError::UnknownCode(*code))
}

/// Shorthand for the code of a symbol (`hat(Symbol::Two)` = 111).
pub fn hat(s: Symbol) -> Bits {
    hat_encode(s)
}

/// The tilde encoding: the hat code of each bit of `s`, followed by the code
/// of `⊣` unless `minus` is set.  The empty string encodes to the code of `⊣`.
pub fn tilde_encode(s: &Bits, minus: bool) -> Bits {
    let mut out = Bits::EMPTY;
    for b in s.iter() {
        out = out.concat(&hat_encode(Symbol::of_bit(b)));
    }
    if !minus {
        out = out.concat(&hat_encode(Symbol::End));
    }
    out
}

/// Inverse of [`tilde_encode`] (full form): `None` unless `code` is a valid
/// tilde encoding.
pub fn tilde_decode(code: &Bits) -> Option<Bits> {
    if code.len() % 3 != 0 || code.is_empty() {
        return None;
    }
    let blocks = code.len() / 3;
    let mut out = Bits::EMPTY;
    for i in 0..blocks {
        let sym = hat_decode(&code.slice(3 * i, 3 * i + 3)).ok()?;
        match (sym, i + 1 == blocks) {
            (Symbol::End, true) => return Some(out),
            (Symbol::Zero, false) => out = out.push(false),
            (Symbol::One, false) => out = out.push(true),
            _ => return None,
        }
    }
    None
}

/// The `n`-th string in the enumeration λ, 0, 1, 00, 01, … (`bin(0) = λ`).
pub fn bin(n: u128) -> Bits {
    // Strings of length L occupy indices 2^L − 1 .. 2^{L+1} − 2.
    let m = n + 1;
    let len = (127 - m.leading_zeros()) as usize;
    Bits::new(len, m - (1u128 << len))
}

/// Inverse of [`bin`].
pub fn bin_index(s: &Bits) -> u128 {
    (1u128 << s.len()) - 1 + s.value()
}

/// The `n`-th string of `{0,1}^k` in lexicographic order, `1 ≤ n ≤ 2^k`.
pub fn bin_k(k: usize, n: u128) -> Result<Bits, CodecError> {
    let size = if k >= 128 { u128::MAX } else { 1u128 << k };
    if n == 0 || n > size || k > crate::qstate::MAX_QUBITS {
        return Err(CodecError::UndefinedIndex { k, n });
    }
    Ok(Bits::new(k, n - 1))
}

/// A basis string split as `x · r0 · data` at the first aligned separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeView {
    /// The code: sections preceding the separator, none equal to `r0`.
    pub x: Bits,
    /// The separator.
    pub r0: Bits,
    /// Everything after the separator.
    pub data: Bits,
}

impl CodeView {
    /// The code region `x · r0`.
    pub fn code(&self) -> Bits {
        self.x.concat(&self.r0)
    }
}

/// Scans the `|r0|`-wide sections of `y` from the left; at the first section
/// equal to `r0` returns the split, otherwise `None` (also for ragged tails).
///
/// # Panics
/// Panics if `r0` is empty.
pub fn parse_code(y: &Bits, r0: &Bits) -> Option<CodeView> {
    let w = r0.len();
    assert!(w > 0, "separator must be nonempty");
    let mut i = 0;
    while i + w <= y.len() {
        if y.slice(i, i + w) == *r0 {
            return Some(CodeView {
                x: y.prefix(i),
                r0: *r0,
                data: y.drop_prefix(i + w),
            });
        }
        i += w;
    }
    None
}

/// Whether `x` is a nonempty or empty code free of `r0`: `|x| ≡ 0 (mod |r0|)`
/// and no aligned section equals `r0`.
pub fn is_section_free(x: &Bits, r0: &Bits) -> bool {
    let w = r0.len();
    x.len() % w == 0 && (0..x.len() / w).all(|i| x.slice(i * w, i * w + w) != *r0)
}

/// The set of codes `x` such that some component of φ parses as `x · r0 · data`.
pub fn non_set(phi: &State, r0: &Bits) -> BTreeSet<Bits> {
    phi.iter()
        .filter_map(|(y, _)| parse_code(&y, r0).map(|v| v.x))
        .collect()
}
