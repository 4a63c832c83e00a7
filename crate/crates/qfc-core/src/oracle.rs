//! Brute-force reference machinery: dense operator matrices, unitarity
//! checks, classical reference functions and a deterministic term fuzzer.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{EvalConfig, EvalError, Evaluator};
use crate::qstate::{Amp, Bits, State};
use crate::schema::{branch, compo, Angle, CfqRec, CodeBound, DivConq, FSlot, PSlot, Term};
use crate::stdlib::Builder;

/// Largest input length accepted by [`to_matrix`].
pub const MAX_MATRIX_QUBITS: usize = 12;

/// A dense `2^n × 2^n` operator, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    /// Input length.
    pub n: usize,
    /// Row-major entries; column j is the image of the j-th basis ket.
    pub entries: Vec<Amp>,
}

/// Failures of the oracle.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    /// The requested dimension exceeds [`MAX_MATRIX_QUBITS`].
    #[error("matrix size 2^{0} exceeds the oracle limit 2^{MAX_MATRIX_QUBITS}")]
    TooLarge(usize),
    /// The term changed the length of some basis ket.
    #[error("dimension-changed: basis ket {input} of length {n} was mapped to length {found}")]
    DimensionChanged {
        /// Input length.
        n: usize,
        /// The basis ket.
        input: Bits,
        /// Output length.
        found: usize,
    },
    /// Evaluation failed.
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl OperatorMatrix {
    /// Side length `2^n`.
    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// The entry at (row, col).
    pub fn get(&self, row: usize, col: usize) -> Amp {
        self.entries[row * self.dim() + col]
    }

    /// The identity operator on n qubits.
    pub fn identity(n: usize) -> OperatorMatrix {
        let d = 1usize << n;
        let mut entries = vec![Amp::default(); d * d];
        for i in 0..d {
            entries[i * d + i] = Amp::new(1.0, 0.0);
        }
        OperatorMatrix { n, entries }
    }

    /// Matrix product `self · other`.
    ///
    /// # Panics
    /// Panics if the dimensions differ.
    pub fn mul(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let d = self.dim();
        let mut entries = vec![Amp::default(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == Amp::default() {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        OperatorMatrix { n: self.n, entries }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> OperatorMatrix {
        let d = self.dim();
        let mut entries = vec![Amp::default(); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        OperatorMatrix { n: self.n, entries }
    }

    /// Matrix–vector product on a state of length n.
    ///
    /// # Panics
    /// Panics if the state length differs from n.
    pub fn apply(&self, phi: &State) -> State {
        if phi.is_null() {
            return State::null();
        }
        assert_eq!(phi.len(), self.n, "state length mismatch");
        let d = self.dim();
        let v = phi.to_dense();
        let mut out = vec![Amp::default(); d];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, x) in v.iter().enumerate() {
                *o += self.entries[i * d + j] * x;
            }
        }
        State::from_dense(self.n, &out)
    }

    /// Largest entrywise deviation `max |A_ij − B_ij|`.
    pub fn max_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The matrix of `term` on inputs of length n (column j = image of `|bin j⟩`).
pub fn to_matrix(term: &Term, n: usize) -> Result<OperatorMatrix, OracleError> {
    to_matrix_with(term, n, &EvalConfig::default())
}

/// [`to_matrix`] with an explicit evaluation configuration.
pub fn to_matrix_with(term: &Term, n: usize, cfg: &EvalConfig) -> Result<OperatorMatrix, OracleError> {
    if n > MAX_MATRIX_QUBITS {
        return Err(OracleError::TooLarge(n));
    }
    let d = 1usize << n;
    let mut ev = Evaluator::new(term, *cfg)?;
    let mut entries = vec![Amp::default(); d * d];
    for j in 0..d {
        let input = Bits::new(n, j as u128);
        let col = ev.eval(&State::basis(input))?;
        if col.is_null() {
            continue;
        }
        if col.len() != n {
            return Err(OracleError::DimensionChanged {
                n,
                input,
                found: col.len(),
            });
        }
        for (b, a) in col.iter() {
            entries[b.value() as usize * d + j] = a;
        }
    }
    Ok(OperatorMatrix { n, entries })
}

/// Outcome of [`check_unitary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryReport {
    /// `max |(M†M − I)_ij|`.
    pub max_deviation: f64,
    /// Whether the deviation is within tolerance.
    pub pass: bool,
}

/// Checks `‖M†M − I‖_max ≤ tol`.
pub fn check_unitary(m: &OperatorMatrix, tol: f64) -> UnitaryReport {
    let dev = m.adjoint().mul(m).max_diff(&OperatorMatrix::identity(m.n));
    UnitaryReport {
        max_deviation: dev,
        pass: dev <= tol,
    }
}

// ---------------------------------------------------------------------------
// Classical references
// ---------------------------------------------------------------------------

/// `⊕_i x_i`.
pub fn parity(x: &Bits) -> bool {
    x.count_ones() % 2 == 1
}

/// `max_i x_i`.
pub fn or(x: &Bits) -> bool {
    x.count_ones() > 0
}

/// `min_i x_i`.
pub fn and(x: &Bits) -> bool {
    x.count_ones() == x.len()
}

/// `(#_0(x), #_1(x))`.
pub fn majority_count(x: &Bits) -> (usize, usize) {
    let ones = x.count_ones();
    (x.len() - ones, ones)
}

/// A classical reference function by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classical {
    /// Parity.
    Parity,
    /// OR.
    Or,
    /// AND.
    And,
    /// Zero and one counts.
    MajorityCount,
}

/// Result of [`classical_ref`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalValue {
    /// A single bit.
    Bit(bool),
    /// `(#_0, #_1)`.
    Counts(usize, usize),
}

/// Evaluates a classical reference function on a nonempty string (`None`
/// for the empty string).
pub fn classical_ref(f: Classical, x: &Bits) -> Option<ClassicalValue> {
    if x.is_empty() {
        return None;
    }
    Some(match f {
        Classical::Parity => ClassicalValue::Bit(parity(x)),
        Classical::Or => ClassicalValue::Bit(or(x)),
        Classical::And => ClassicalValue::Bit(and(x)),
        Classical::MajorityCount => {
            let (a, b) = majority_count(x);
            ClassicalValue::Counts(a, b)
        }
    })
}

// ---------------------------------------------------------------------------
// Fuzzing
// ---------------------------------------------------------------------------

/// A generated term and whether it is measurement-free.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzTerm {
    /// The term.
    pub term: Term,
    /// Whether no measurement occurs in it.
    pub measurement_free: bool,
}

/// Separators used by the fuzzer.
const FUZZ_SEPARATORS: [&str; 5] = ["1", "0", "11", "111", "011"];

#[derive(Clone, Copy)]
struct Ctx {
    depth: usize,
    allow_meas: bool,
    allow_dc: bool,
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen::<f64>() < p
    }

    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[self.rng.gen_range(0..xs.len())]
    }

    fn angle(&mut self) -> Angle {
        if self.chance(0.7) {
            let den = self.pick(&[1u64, 2, 3, 4, 6, 8]);
            let num = self.rng.gen_range(-8i64..=8);
            Angle::pi_frac(num, den)
        } else {
            Angle::Decimal(self.rng.gen_range(-3.5f64..3.5))
        }
    }

    fn r0(&mut self) -> Bits {
        self.pick(&FUZZ_SEPARATORS).parse().expect("literal")
    }

    fn leaf(&mut self, ctx: Ctx) -> Term {
        match self.rng.gen_range(0..20) {
            0..=2 => Term::Ident,
            3..=5 => Term::Phase(self.angle()),
            6..=9 => Term::Rot(self.angle()),
            10..=12 => Term::Not,
            13..=15 => Term::Swap,
            16 if ctx.allow_meas => Term::Meas(self.chance(0.5)),
            17 => Term::CodeRemove(self.pick(&["0", "1"]).parse().expect("literal")),
            18 => Term::CodeRep(self.pick(&["0", "1"]).parse().expect("literal")),
            _ => Term::Named(self.small_builder_leaf()),
        }
    }

    fn small_builder_leaf(&mut self) -> Builder {
        match self.rng.gen_range(0..14) {
            0 => Builder::Cnot,
            1 => Builder::Wh,
            2 => Builder::Cswap,
            3 => Builder::Gps(self.angle()),
            4 => Builder::Z1(self.angle()),
            5 => Builder::Zrot(self.angle()),
            6 => Builder::CRot(self.angle()),
            7 => Builder::CPhase(self.angle()),
            8 => Builder::LengthQ(self.rng.gen_range(1..=2)),
            9 => {
                let i = self.rng.gen_range(1..=3);
                let j = self.rng.gen_range(i..=4);
                Builder::SwapIJ(i, j)
            }
            10 => Builder::Copy(self.rng.gen_range(1..=2)),
            11 => Builder::GAnd,
            12 => Builder::GOr,
            _ => {
                let i = self.rng.gen_range(1..=2);
                Builder::SecMove(2, i, i + 1)
            }
        }
    }

    /// Any well-formed term.
    fn any(&mut self, ctx: Ctx) -> Term {
        if ctx.depth <= 1 || self.chance(0.25) {
            return self.leaf(ctx);
        }
        let sub = Ctx {
            depth: ctx.depth - 1,
            ..ctx
        };
        match self.rng.gen_range(0..16) {
            0..=2 => compo(self.any(sub), self.any(sub)),
            3..=4 => branch(self.any(sub), self.any(sub)),
            5..=6 => self.cfqrec(sub),
            7 => {
                let r0 = self.r0();
                Term::LCompo(r0, Box::new(self.safe(r0, sub, false)))
            }
            8 => {
                let r0 = self.r0();
                Term::CodeControlled(r0, Box::new(self.safe(r0, sub, false)))
            }
            9 => Term::HalfD(Box::new(self.any(sub)), Box::new(self.any(sub))),
            10 => Term::MidApp(self.rng.gen_range(1..=2), Box::new(self.any(sub))),
            11 if ctx.allow_dc => self.divconq(sub),
            12 => Term::Named(Builder::Skip(self.rng.gen_range(1..=2), Box::new(self.any(sub)))),
            13 => Term::Named(Builder::BranchK(1, vec![self.any(sub), self.any(sub)])),
            14 => Term::Named(Builder::CompoMulti(vec![self.any(sub), self.any(sub), self.any(sub)])),
            _ => self.leaf(ctx),
        }
    }

    fn cfqrec(&mut self, ctx: Ctx) -> Term {
        let r0 = self.r0();
        let n = 1usize << r0.len();
        let p = (0..n)
            .map(|_| {
                if self.chance(0.5) {
                    PSlot::HalfSwap
                } else {
                    PSlot::Ident
                }
            })
            .collect();
        let f = (0..n)
            .map(|_| if self.chance(0.6) { FSlot::SelfRef } else { FSlot::Ident })
            .collect();
        Term::CfqRec(Box::new(CfqRec {
            t: self.rng.gen_range(1..=2),
            r0,
            d: self.safe(r0, ctx, true),
            g: self.safe(r0, ctx, false),
            h: self.safe(r0, ctx, true),
            p,
            f,
            bound: if self.chance(0.2) {
                CodeBound::Unbounded
            } else {
                CodeBound::Log
            },
        }))
    }

    fn divconq(&mut self, ctx: Ctx) -> Term {
        let k = self.rng.gen_range(1..=2);
        let inner = Ctx {
            allow_dc: false,
            allow_meas: false,
            ..ctx
        };
        let body = Ctx { allow_dc: false, ..ctx };
        let p = if self.chance(0.5) {
            Term::Ident
        } else {
            Term::MidApp(k, Box::new(self.any(inner)))
        };
        let slot = |g: &mut Gen| if g.chance(0.8) { FSlot::SelfRef } else { FSlot::Ident };
        let f1 = slot(self);
        let f2 = slot(self);
        Term::DivConq(Box::new(DivConq {
            k,
            g: self.any(body),
            h: self.any(body),
            p,
            f1,
            f2,
        }))
    }

    /// A term that maps every code `x r0` (alone or followed by data) to a
    /// superposition of codes of the same shape.  `dh` marks the code-only
    /// d/h slots, where code skipping is allowed.
    fn safe(&mut self, r0: Bits, ctx: Ctx, dh: bool) -> Term {
        let r = r0.len();
        let uniform = r0.count_ones() == 0 || r0.count_ones() == r;
        let sub = Ctx {
            depth: ctx.depth.saturating_sub(1),
            allow_meas: false,
            ..ctx
        };
        let choice = if ctx.depth <= 1 {
            self.rng.gen_range(0..4)
        } else {
            self.rng.gen_range(0..11)
        };
        match choice {
            0 | 1 => self.diagonal(sub),
            2 if uniform && r >= 2 => {
                let j = self.rng.gen_range(0..3);
                let o = self.rng.gen_range(0..r - 1);
                let pos = j * r + o;
                if pos == 0 {
                    Term::Swap
                } else {
                    Term::Named(Builder::Skip(pos, Box::new(Term::Swap)))
                }
            }
            3 if r >= 2 && (r0.count_ones() == r || r0.count_ones() == 0) => {
                let local = self.local(r - 1, sub);
                if r0.count_ones() == r {
                    branch(local, Term::Ident)
                } else {
                    branch(Term::Ident, local)
                }
            }
            4 | 5 => compo(self.safe(r0, sub, dh), self.safe(r0, sub, dh)),
            6 => {
                let n = 1usize << r;
                let p = (0..n)
                    .map(|_| {
                        if self.chance(0.5) {
                            PSlot::HalfSwap
                        } else {
                            PSlot::Ident
                        }
                    })
                    .collect();
                let f = (0..n)
                    .map(|_| if self.chance(0.6) { FSlot::SelfRef } else { FSlot::Ident })
                    .collect();
                Term::CfqRec(Box::new(CfqRec {
                    t: 1,
                    r0,
                    d: self.safe(r0, sub, true),
                    g: self.safe(r0, sub, false),
                    h: self.safe(r0, sub, true),
                    p,
                    f,
                    bound: CodeBound::Log,
                }))
            }
            7 => Term::LCompo(r0, Box::new(self.safe(r0, sub, dh))),
            8 => Term::CodeControlled(r0, Box::new(self.safe(r0, sub, dh))),
            9 if dh => Term::CodeSkipPlus(r0, Box::new(self.safe(r0, sub, dh)), Box::new(self.any(sub))),
            10 if dh => Term::CodeSkipMinus(
                r0,
                Box::new(self.safe(r0, sub, dh)),
                Box::new(Term::Named(Builder::Skip(r, Box::new(self.any(sub))))),
            ),
            _ => self.diagonal(sub),
        }
    }

    /// Diagonal (phase-only) terms.
    fn diagonal(&mut self, ctx: Ctx) -> Term {
        if ctx.depth <= 1 || self.chance(0.4) {
            return match self.rng.gen_range(0..6) {
                0 => Term::Ident,
                1 | 2 => Term::Phase(self.angle()),
                3 => Term::Named(Builder::Z1(self.angle())),
                4 => Term::Named(Builder::CPhase(self.angle())),
                _ => Term::Named(Builder::Zrot(self.angle())),
            };
        }
        let sub = Ctx {
            depth: ctx.depth - 1,
            ..ctx
        };
        if self.chance(0.5) {
            compo(self.diagonal(sub), self.diagonal(sub))
        } else {
            branch(self.diagonal(sub), self.diagonal(sub))
        }
    }

    /// Terms acting within the first `width` qubits.
    fn local(&mut self, width: usize, ctx: Ctx) -> Term {
        let leaf = |g: &mut Gen| match g.rng.gen_range(0..4) {
            0 => Term::Rot(g.angle()),
            1 => Term::Phase(g.angle()),
            2 if width >= 2 => Term::Swap,
            _ => Term::Not,
        };
        if ctx.depth <= 1 || self.chance(0.4) {
            return leaf(self);
        }
        let sub = Ctx {
            depth: ctx.depth - 1,
            ..ctx
        };
        if width >= 2 && self.chance(0.5) {
            branch(self.local(width - 1, sub), self.local(width - 1, sub))
        } else {
            compo(self.local(width, sub), self.local(width, sub))
        }
    }
}

/// Deterministic pseudorandom well-formed terms of depth at most
/// `max_depth` (named builders count as one level plus their term
/// parameters).
pub fn fuzz_terms(seed: u64, count: usize, max_depth: usize) -> Vec<FuzzTerm> {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let ctx = Ctx {
        depth: max_depth.max(1),
        allow_meas: true,
        allow_dc: true,
    };
    (0..count)
        .map(|_| {
            let term = loop {
                let t = g.any(ctx);
                if term_depth(&t) <= max_depth.max(1) {
                    break t;
                }
            };
            let measurement_free = !term.contains_meas();
            FuzzTerm { term, measurement_free }
        })
        .collect()
}

/// The first `count` measurement-free terms of the fuzz stream for `seed`.
pub fn measurement_free_corpus(seed: u64, count: usize, max_depth: usize) -> Vec<Term> {
    let mut out = Vec::with_capacity(count);
    let mut round = 0u64;
    while out.len() < count {
        let batch = fuzz_terms(
            seed.wrapping_add(round.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            count,
            max_depth,
        );
        out.extend(
            batch
                .into_iter()
                .filter(|f| f.measurement_free)
                .map(|f| f.term)
                .take(count - out.len()),
        );
        round += 1;
    }
    out
}

/// Syntactic depth of a term (named builders: one plus their term parameters).
pub fn term_depth(t: &Term) -> usize {
    let kids: Vec<&Term> = match t {
        Term::Named(b) => match b {
            Builder::Skip(_, g) | Builder::CodeLift(_, g) | Builder::FoldBlocks(_, g) | Builder::ClockRepeat(g) => {
                vec![&**g]
            }
            Builder::CompoMulti(gs) | Builder::MultiApply(gs) | Builder::BranchK(_, gs) => gs.iter().collect(),
            _ => Vec::new(),
        },
        _ => t.children(),
    };
    1 + kids.into_iter().map(term_depth).max().unwrap_or(0)
}

/// A pseudorandom unit state of length n with at most `max_terms` nonzero
/// amplitudes (all of them when `max_terms ≥ 2^n`).
pub fn random_state(rng: &mut impl Rng, n: usize, max_terms: usize) -> State {
    let mut st = State::zero(n);
    let full = n < 20 && max_terms >= 1usize << n;
    let picks = if full { 1usize << n } else { max_terms.max(1) };
    for i in 0..picks {
        let key = if full {
            i as u128
        } else if n == 0 {
            0
        } else {
            rng.gen::<u128>() >> (128 - n)
        };
        let a = Amp::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        st.add_scaled(&State::basis(Bits::new(n, key)), a);
    }
    let norm = st.norm();
    if norm == 0.0 {
        return State::basis(Bits::zeros(n));
    }
    st.scaled(Amp::new(1.0 / norm, 0.0))
}
