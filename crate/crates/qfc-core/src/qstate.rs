//! Quantum states over variable-length qubit registers and the symbolic
//! bra/ket algebra used by the interpreter.
//!
//! A [`State`] is either the null vector or a length-tagged sparse vector over
//! basis strings.  Length-0 states are scalars.  Basis strings are [`Bits`]
//! values of at most [`MAX_QUBITS`] bits; bit 1 (the leftmost qubit) is the most
//! significant bit of the packed integer, so the integer order of keys is the
//! lexicographic order of basis strings.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

/// Maximum number of qubits a single basis string may carry.
pub const MAX_QUBITS: usize = 128;

/// Complex amplitude type.
pub type Amp = Complex64;

/// Error returned when a bit string literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitsError {
    /// A character other than `0`/`1` (or the empty-string marker) was found.
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
    /// The literal has more than [`MAX_QUBITS`] bits.
    #[error("bit string longer than {MAX_QUBITS} bits")]
    TooLong,
}

/// A binary string of at most [`MAX_QUBITS`] bits.
///
/// Ordering is shortlex: shorter strings first, then lexicographic.  This is
/// the enumeration order λ, 0, 1, 00, 01, … used for natural numbers.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    len: u8,
    val: u128,
}

#[inline]
fn mask(len: usize) -> u128 {
    if len >= 128 {
        u128::MAX
    } else {
        (1u128 << len) - 1
    }
}

#[inline]
fn shl(v: u128, by: usize) -> u128 {
    if by >= 128 {
        0
    } else {
        v << by
    }
}

#[inline]
fn shr(v: u128, by: usize) -> u128 {
    if by >= 128 {
        0
    } else {
        v >> by
    }
}

impl Bits {
    /// The empty string λ.
    pub const EMPTY: Bits = Bits { len: 0, val: 0 };

    /// Builds a string of `len` bits from the low `len` bits of `val`.
    ///
    /// # Panics
    /// Panics if `len > MAX_QUBITS`.
    pub fn new(len: usize, val: u128) -> Bits {
        assert!(len <= MAX_QUBITS, "bit string longer than {MAX_QUBITS} bits");
        Bits {
            len: len as u8,
            val: val & mask(len),
        }
    }

    /// A string of `len` zeros.
    pub fn zeros(len: usize) -> Bits {
        Bits::new(len, 0)
    }

    /// A string of `len` ones.
    pub fn ones(len: usize) -> Bits {
        Bits::new(len, u128::MAX)
    }

    /// Builds a string from a slice of bits (`true` = 1).
    pub fn from_bools(bits: &[bool]) -> Bits {
        bits.iter().fold(Bits::EMPTY, |acc, &b| acc.push(b))
    }

    /// Number of bits.
    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// Whether this is the empty string.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The packed value (bit 1 is the most significant of the `len` bits).
    #[inline]
    pub fn value(&self) -> u128 {
        self.val
    }

    /// The bit at 0-based position `i` counted from the left.
    ///
    /// # Panics
    /// Panics if `i >= len`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len(), "bit index out of range");
        (self.val >> (self.len() - 1 - i)) & 1 == 1
    }

    /// Returns a copy with the bit at 0-based position `i` set to `b`.
    pub fn with(&self, i: usize, b: bool) -> Bits {
        assert!(i < self.len(), "bit index out of range");
        let m = 1u128 << (self.len() - 1 - i);
        let val = if b { self.val | m } else { self.val & !m };
        Bits { len: self.len, val }
    }

    /// Appends one bit on the right.
    pub fn push(&self, b: bool) -> Bits {
        Bits::new(self.len() + 1, (shl(self.val, 1)) | b as u128)
    }

    /// Concatenation `self · other`.
    ///
    /// # Panics
    /// Panics if the result exceeds [`MAX_QUBITS`].
    pub fn concat(&self, other: &Bits) -> Bits {
        let len = self.len() + other.len();
        assert!(len <= MAX_QUBITS, "bit string longer than {MAX_QUBITS} bits");
        Bits::new(len, shl(self.val, other.len()) | other.val)
    }

    /// The first `k` bits.
    pub fn prefix(&self, k: usize) -> Bits {
        assert!(k <= self.len(), "prefix longer than string");
        Bits::new(k, shr(self.val, self.len() - k))
    }

    /// Everything after the first `k` bits.
    pub fn drop_prefix(&self, k: usize) -> Bits {
        assert!(k <= self.len(), "prefix longer than string");
        Bits::new(self.len() - k, self.val)
    }

    /// Bits `[a, b)` (0-based, half open).
    pub fn slice(&self, a: usize, b: usize) -> Bits {
        assert!(a <= b && b <= self.len(), "slice out of range");
        self.prefix(b).drop_prefix(a)
    }

    /// Splits into the first `k` bits and the rest.
    pub fn split_at(&self, k: usize) -> (Bits, Bits) {
        (self.prefix(k), self.drop_prefix(k))
    }

    /// Exchanges the bits at 0-based positions `i` and `j`.
    pub fn swap_bits(&self, i: usize, j: usize) -> Bits {
        let (bi, bj) = (self.get(i), self.get(j));
        self.with(i, bj).with(j, bi)
    }

    /// Iterates over the bits from left to right.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Number of 1 bits.
    pub fn count_ones(&self) -> usize {
        self.val.count_ones() as usize
    }

    /// Renders as a `0`/`1` string (`""` for λ).
    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for Bits {
    /// Formats as `0`/`1` characters; the empty string is shown as `λ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("λ");
        }
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl FromStr for Bits {
    type Err = BitsError;

    /// Parses a `0`/`1` string; `""` and `λ` denote the empty string.
    fn from_str(s: &str) -> Result<Bits, BitsError> {
        if s == "λ" {
            return Ok(Bits::EMPTY);
        }
        if s.chars().count() > MAX_QUBITS {
            return Err(BitsError::TooLong);
        }
        let mut out = Bits::EMPTY;
        for c in s.chars() {
            out = match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => return Err(BitsError::InvalidChar(other)),
            };
        }
        Ok(out)
    }
}

/// Whether a state is the null vector or a proper (length-tagged) vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// The null vector 𝟎.
    Null,
    /// A vector of a definite length (length 0 = scalar).
    Proper,
}

/// A quantum state: the null vector or a sparse vector of a fixed length.
///
/// Exact-zero amplitudes are never stored.  A proper state with no stored
/// amplitudes is the zero vector of its length.
#[derive(Clone, PartialEq)]
pub struct State {
    repr: Repr,
}

#[derive(Clone, PartialEq)]
enum Repr {
    Null,
    Vector { len: usize, amps: BTreeMap<u128, Amp> },
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Null => f.write_str("State::Null"),
            Repr::Vector { len, amps } => {
                write!(f, "State[len {len}]{{")?;
                for (i, (k, a)) in amps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {}{:+}i", Bits::new(*len, *k), a.re, a.im)?;
                }
                f.write_str("}")
            }
        }
    }
}

// `len` is the qubit count, so an `is_empty` would be ambiguous; see `is_zero`.
#[allow(clippy::len_without_is_empty)]
impl State {
    /// The null vector 𝟎 (length 0 by convention).
    pub fn null() -> State {
        State { repr: Repr::Null }
    }

    /// The zero vector of length `len`.
    pub fn zero(len: usize) -> State {
        assert!(len <= MAX_QUBITS, "state longer than {MAX_QUBITS} qubits");
        State {
            repr: Repr::Vector {
                len,
                amps: BTreeMap::new(),
            },
        }
    }

    /// The basis ket |s⟩.
    pub fn basis(s: Bits) -> State {
        let mut st = State::zero(s.len());
        st.add_amp(s.value(), Amp::new(1.0, 0.0));
        st
    }

    /// The basis ket |s⟩ for a `0`/`1` literal.
    ///
    /// # Panics
    /// Panics on malformed literals; intended for tests and fixed constructions.
    pub fn ket(s: &str) -> State {
        State::basis(s.parse().expect("valid bit literal"))
    }

    /// The length-0 scalar with value `c`.
    pub fn scalar(c: Amp) -> State {
        let mut st = State::zero(0);
        st.add_amp(0, c);
        st
    }

    /// Builds a state of length `len` from (basis, amplitude) pairs; repeated
    /// basis strings are summed.
    ///
    /// # Panics
    /// Panics if a basis string does not have length `len`.
    pub fn from_amplitudes<I: IntoIterator<Item = (Bits, Amp)>>(len: usize, items: I) -> State {
        let mut st = State::zero(len);
        for (b, a) in items {
            assert_eq!(b.len(), len, "basis string length mismatch");
            st.add_amp(b.value(), a);
        }
        st
    }

    /// Null or proper.
    pub fn kind(&self) -> Kind {
        match self.repr {
            Repr::Null => Kind::Null,
            Repr::Vector { .. } => Kind::Proper,
        }
    }

    /// Whether this is the null vector.
    pub fn is_null(&self) -> bool {
        matches!(self.repr, Repr::Null)
    }

    /// The length ℓ(φ); the null vector has length 0.
    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Null => 0,
            Repr::Vector { len, .. } => *len,
        }
    }

    /// Whether no amplitude is stored (null or zero vector).  Not the same as
    /// `len() == 0`: a zero vector may have any length.
    pub fn is_zero(&self) -> bool {
        self.num_terms() == 0
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn num_terms(&self) -> usize {
        match &self.repr {
            Repr::Null => 0,
            Repr::Vector { amps, .. } => amps.len(),
        }
    }

    /// The amplitude of basis string `s` (0 when absent or length differs).
    pub fn amplitude(&self, s: &Bits) -> Amp {
        match &self.repr {
            Repr::Vector { len, amps } if *len == s.len() => amps.get(&s.value()).copied().unwrap_or_default(),
            _ => Amp::default(),
        }
    }

    /// For a length-0 state, its scalar value.
    pub fn as_scalar(&self) -> Option<Amp> {
        match &self.repr {
            Repr::Vector { len: 0, amps } => Some(amps.get(&0).copied().unwrap_or_default()),
            _ => None,
        }
    }

    /// Iterates (basis string, amplitude) in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Bits, Amp)> + '_ {
        let (len, amps) = match &self.repr {
            Repr::Null => (0, None),
            Repr::Vector { len, amps } => (*len, Some(amps)),
        };
        amps.into_iter()
            .flat_map(|m| m.iter())
            .map(move |(k, a)| (Bits::new(len, *k), *a))
    }

    /// Iterates raw (packed key, amplitude) pairs.
    pub(crate) fn raw_iter(&self) -> impl Iterator<Item = (u128, Amp)> + '_ {
        let amps = match &self.repr {
            Repr::Null => None,
            Repr::Vector { amps, .. } => Some(amps),
        };
        amps.into_iter().flat_map(|m| m.iter()).map(|(k, a)| (*k, *a))
    }

    /// Adds `a` to the amplitude at packed key `key`, dropping exact zeros.
    ///
    /// # Panics
    /// Panics on the null vector.
    pub(crate) fn add_amp(&mut self, key: u128, a: Amp) {
        let Repr::Vector { amps, .. } = &mut self.repr else {
            panic!("cannot add amplitudes to the null vector");
        };
        if a.re == 0.0 && a.im == 0.0 {
            return;
        }
        match amps.entry(key) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(a);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let v = *e.get() + a;
                if v.re == 0.0 && v.im == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    /// Adds `c · other` into `self`.  The null vector contributes nothing.
    ///
    /// # Panics
    /// Panics if both are proper with different lengths, or if `self` is null
    /// while `other` is not.
    pub fn add_scaled(&mut self, other: &State, c: Amp) {
        if other.is_null() {
            return;
        }
        assert!(!self.is_null(), "cannot accumulate into the null vector");
        assert_eq!(self.len(), other.len(), "length mismatch in state sum");
        for (k, a) in other.raw_iter() {
            self.add_amp(k, a * c);
        }
    }

    /// Returns `c · self`.
    pub fn scaled(&self, c: Amp) -> State {
        match &self.repr {
            Repr::Null => State::null(),
            Repr::Vector { len, .. } => {
                let mut out = State::zero(*len);
                for (k, a) in self.raw_iter() {
                    out.add_amp(k, a * c);
                }
                out
            }
        }
    }

    /// Squared norm Σ|α|².
    pub fn norm_sqr(&self) -> f64 {
        self.raw_iter().fold(0.0, |acc, (_, a)| acc + a.norm_sqr())
    }

    /// Euclidean norm √(Σ|α|²); the null vector has norm 0.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    /// Applies a bit-string map to every basis key (a permutation when `f` is
    /// injective on the support).
    pub(crate) fn map_keys(&self, new_len: usize, mut f: impl FnMut(Bits) -> Bits) -> State {
        match &self.repr {
            Repr::Null => State::null(),
            Repr::Vector { len, .. } => {
                let mut out = State::zero(new_len);
                for (k, a) in self.raw_iter() {
                    let nb = f(Bits::new(*len, k));
                    debug_assert_eq!(nb.len(), new_len);
                    out.add_amp(nb.value(), a);
                }
                out
            }
        }
    }

    /// Groups the components by their first `k` bits: returns each prefix with
    /// the corresponding sub-state ⟨prefix|φ⟩.
    ///
    /// # Panics
    /// Panics if `k` exceeds the length or the state is null.
    pub(crate) fn split_prefix(&self, k: usize) -> Vec<(Bits, State)> {
        let len = self.len();
        assert!(!self.is_null() && k <= len, "invalid prefix split");
        let mut out: Vec<(Bits, State)> = Vec::new();
        for (key, a) in self.raw_iter() {
            let b = Bits::new(len, key);
            let (p, rest) = b.split_at(k);
            match out.last_mut() {
                Some((lp, st)) if *lp == p => st.add_amp(rest.value(), a),
                _ => {
                    let mut st = State::zero(len - k);
                    st.add_amp(rest.value(), a);
                    out.push((p, st));
                }
            }
        }
        out
    }

    /// ‖self − other‖, treating the null vector as zero.
    ///
    /// # Panics
    /// Panics when both are proper, nonempty-length-distinct states.
    pub fn distance(&self, other: &State) -> f64 {
        libm::sqrt(self.distance_sqr(other))
    }

    fn distance_sqr(&self, other: &State) -> f64 {
        if self.is_null() {
            return other.norm_sqr();
        }
        if other.is_null() {
            return self.norm_sqr();
        }
        assert_eq!(self.len(), other.len(), "length mismatch in distance");
        let mut diff = self.clone();
        diff.add_scaled(other, Amp::new(-1.0, 0.0));
        diff.norm_sqr()
    }

    /// Largest per-amplitude deviation |α_s − β_s| over all basis strings.
    pub fn max_amp_diff(&self, other: &State) -> f64 {
        let mut keys: Vec<u128> = self.raw_iter().map(|(k, _)| k).collect();
        keys.extend(other.raw_iter().map(|(k, _)| k));
        let (la, lb) = (self.len(), other.len());
        let worst = keys
            .iter()
            .map(|&k| {
                let a = if self.is_null() {
                    Amp::default()
                } else {
                    self.amplitude(&Bits::new(la, k))
                };
                let b = if other.is_null() {
                    Amp::default()
                } else {
                    other.amplitude(&Bits::new(lb, k))
                };
                (a - b).norm_sqr()
            })
            .fold(0.0, f64::max);
        libm::sqrt(worst)
    }

    /// Dense amplitude vector of length 2^n (index = packed basis value).
    ///
    /// # Panics
    /// Panics for lengths above 24 qubits.
    pub fn to_dense(&self) -> Vec<Amp> {
        let n = self.len();
        assert!(n <= 24, "dense form limited to 24 qubits");
        let mut v = alloc::vec![Amp::default(); 1usize << n];
        for (k, a) in self.raw_iter() {
            v[k as usize] = a;
        }
        v
    }

    /// Builds a length-`n` state from a dense amplitude vector.
    pub fn from_dense(n: usize, v: &[Amp]) -> State {
        assert_eq!(v.len(), 1usize << n, "dense vector size mismatch");
        let mut st = State::zero(n);
        for (i, a) in v.iter().enumerate() {
            st.add_amp(i as u128, *a);
        }
        st
    }
}

/// Tensor product with the scalar and null conventions: the null vector
/// absorbs, a scalar 0 yields the null vector, and a scalar α scales the other
/// operand.
pub fn tensor(a: &State, b: &State) -> State {
    if a.is_null() || b.is_null() {
        return State::null();
    }
    if let Some(c) = a.as_scalar() {
        return if c == Amp::default() {
            State::null()
        } else {
            b.scaled(c)
        };
    }
    if let Some(c) = b.as_scalar() {
        return if c == Amp::default() {
            State::null()
        } else {
            a.scaled(c)
        };
    }
    let lb = b.len();
    let mut out = State::zero(a.len() + lb);
    for (ka, xa) in a.raw_iter() {
        for (kb, xb) in b.raw_iter() {
            out.add_amp(shl(ka, lb) | kb, xa * xb);
        }
    }
    out
}

/// ⟨u|φ⟩: the partial inner product with a basis bra.
///
/// Yields the null vector when `|u| > ℓ(φ)` or φ is null, a scalar when the
/// lengths match, and otherwise the state of the remaining qubits.
pub fn bra_reduce(u: &Bits, phi: &State) -> State {
    if phi.is_null() || u.len() > phi.len() {
        return State::null();
    }
    let len = phi.len();
    let rest = len - u.len();
    let mut out = State::zero(rest);
    for (k, a) in phi.raw_iter() {
        let b = Bits::new(len, k);
        if b.prefix(u.len()) == *u {
            out.add_amp(b.drop_prefix(u.len()).value(), a);
        }
    }
    out
}

/// ⟨ξ|φ⟩ = Σ_u conj(ξ_u)·⟨u|φ⟩; the ordinary inner product (as a scalar state)
/// when the lengths agree.
pub fn inner(xi: &State, phi: &State) -> State {
    if xi.is_null() || phi.is_null() || xi.len() > phi.len() {
        return State::null();
    }
    let mut out = State::zero(phi.len() - xi.len());
    for (u, c) in xi.iter() {
        out.add_scaled(&bra_reduce(&u, phi), c.conj());
    }
    out
}

/// The norm ‖φ‖ (null → 0, scalar → its magnitude).
pub fn norm(phi: &State) -> f64 {
    phi.norm()
}

/// Half-length arithmetic of a length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfLengths {
    /// ⌈n/2⌉.
    pub lh: usize,
    /// ⌊n/2⌋.
    pub rh: usize,
    /// ⌈log₂ n⌉ with ilog(0) = 0.
    pub ilog: usize,
}

/// ⌈log₂ n⌉, with `ilog(0) = ilog(1) = 0`.
pub fn ilog(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Returns (⌈n/2⌉, ⌊n/2⌋, ilog n).
pub fn half_lengths(n: usize) -> HalfLengths {
    HalfLengths {
        lh: n.div_ceil(2),
        rh: n / 2,
        ilog: ilog(n),
    }
}

/// Rotates a basis string: moves its first `k` bits to the back.
pub(crate) fn rotate_front(b: Bits, k: usize) -> Bits {
    let (p, r) = b.split_at(k);
    r.concat(&p)
}

/// HalfSWAP: moves the first ⌈ℓ/2⌉ qubits to the back (the inverse moves the
/// first ⌊ℓ/2⌋).  Identity on the null vector and on lengths ≤ 1.
pub fn half_swap(phi: &State, inverse: bool) -> State {
    let n = phi.len();
    if phi.is_null() || n <= 1 {
        return phi.clone();
    }
    let h = half_lengths(n);
    let k = if inverse { h.rh } else { h.lh };
    phi.map_keys(n, |b| rotate_front(b, k))
}

/// HalfSWAP (or its inverse) on a single basis string.
pub(crate) fn half_swap_bits(b: Bits, inverse: bool) -> Bits {
    let n = b.len();
    if n <= 1 {
        return b;
    }
    let h = half_lengths(n);
    rotate_front(b, if inverse { h.rh } else { h.lh })
}
