//! The interpreter: evaluates terms on states, plus measurement and sampling
//! utilities.
//!
//! Code-controlled constructors are evaluated per basis string and extended
//! linearly.  Basis-string evaluations of sub-terms are memoized per
//! [`Evaluator`], keyed by node identity and input basis string; terms are
//! pure, so the memo never changes a result.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::parse_code;
use crate::qstate::{half_lengths, half_swap_bits, ilog, tensor, Amp, Bits, State, MAX_QUBITS};
use crate::schema::{CfqRec, CodeBound, DivConq, FSlot, PSlot, Term};
use crate::stdlib::BuildError;

/// Evaluation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Amplitude tolerance for the d-output discipline of the fast recursion.
    pub tolerance: f64,
    /// Recursion depth safeguard.
    pub max_recursion_depth: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tolerance: 1e-9,
            max_recursion_depth: 64,
        }
    }
}

/// Evaluation failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    /// The code transformer d produced something other than a superposition
    /// of well-formed codes of the input's code length.
    #[error("invalid-permutation-d: d maps code {code} to a component {found} that is not a code of the same length")]
    InvalidPermutationD {
        /// The code that was transformed.
        code: Bits,
        /// The offending output component.
        found: Bits,
    },
    /// The recursion safeguard tripped.
    #[error("recursion-depth-exceeded: more than {0} nested recursive calls")]
    RecursionDepthExceeded(usize),
    /// A sub-term changed the length of its input.
    #[error("length-mismatch: expected length {expected}, found {found}")]
    LengthMismatch {
        /// Expected length.
        expected: usize,
        /// Actual length.
        found: usize,
    },
    /// An intermediate state would exceed the supported register width.
    #[error("state-too-long: states are limited to {MAX_QUBITS} qubits")]
    StateTooLong,
    /// A named builder failed to expand.
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Errors of the measurement helpers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    /// The state has no qubit to measure.
    #[error("no-qubit: cannot measure a null or length-0 state")]
    NoQubit,
    /// The state has norm zero.
    #[error("zero-norm: cannot sample from a state of norm 0")]
    ZeroNorm,
}

/// Evaluates `term` on `phi`.
pub fn eval(term: &Term, phi: &State, cfg: &EvalConfig) -> Result<State, EvalError> {
    Evaluator::new(term, *cfg)?.eval(phi)
}

/// Evaluates `term` on `phi` with the default configuration.
pub fn eval_default(term: &Term, phi: &State) -> Result<State, EvalError> {
    eval(term, phi, &EvalConfig::default())
}

/// A reusable evaluator for one term; repeated evaluations share the memo.
pub struct Evaluator {
    // Boxed so that the root node keeps its address across evaluations.
    term: Box<Term>,
    cfg: EvalConfig,
    memo: BTreeMap<(usize, u8, u128), State>,
}

/// Memo entries kept before the cache is flushed.
const MEMO_LIMIT: usize = 1 << 20;

impl Evaluator {
    /// Prepares `term` (expanding named builders).
    pub fn new(term: &Term, cfg: EvalConfig) -> Result<Evaluator, EvalError> {
        let term = Box::new(if term.has_named() {
            term.expand_named()?
        } else {
            term.clone()
        });
        Ok(Evaluator {
            term,
            cfg,
            memo: BTreeMap::new(),
        })
    }

    /// The (expanded) term being evaluated.
    pub fn term(&self) -> &Term {
        &self.term
    }

    /// Evaluates the term on `phi`.
    pub fn eval(&mut self, phi: &State) -> Result<State, EvalError> {
        if self.memo.len() > MEMO_LIMIT {
            self.memo.clear();
        }
        // The term is moved out while evaluating so that `self` remains
        // mutably borrowable; every node stays at its heap address.
        let term = core::mem::replace(&mut self.term, Box::new(Term::Ident));
        let mut run = Run {
            cfg: self.cfg,
            memo: core::mem::take(&mut self.memo),
        };
        let out = run.state(&term, phi, 0);
        self.memo = run.memo;
        self.term = term;
        out
    }
}

struct Run {
    cfg: EvalConfig,
    memo: BTreeMap<(usize, u8, u128), State>,
}

fn amp(re: f64, im: f64) -> Amp {
    Amp::new(re, im)
}

fn one() -> Amp {
    amp(1.0, 0.0)
}

/// Sums `α_y · f(y)` over the components of `phi` (all results must have
/// the input's length).
fn per_basis(phi: &State, mut f: impl FnMut(Bits) -> Result<State, EvalError>) -> Result<State, EvalError> {
    if phi.is_null() {
        return Ok(State::null());
    }
    let n = phi.len();
    let mut out = State::zero(n);
    for (y, a) in phi.iter() {
        let r = f(y)?;
        if r.is_null() {
            continue;
        }
        if r.len() != n {
            return Err(EvalError::LengthMismatch {
                expected: n,
                found: r.len(),
            });
        }
        out.add_scaled(&r, a);
    }
    Ok(out)
}

/// Exchange of qubits i and j (1-based) on a basis string; identity when
/// i = j or the string is shorter than max(i, j).
fn swap_positions(b: Bits, i: usize, j: usize) -> Bits {
    if i == j || b.len() < i.max(j) {
        b
    } else {
        b.swap_bits(i - 1, j - 1)
    }
}

/// The middle swap of width k on a basis string (or its inverse).
fn mid_swap(b: Bits, k: usize, inverse: bool) -> Bits {
    let m = half_lengths(b.len()).lh;
    let mut out = b;
    if inverse {
        for i in (1..=k).rev() {
            out = swap_positions(out, k + i, m + i);
        }
    } else {
        for i in 1..=k {
            out = swap_positions(out, k + i, m + i);
        }
    }
    out
}

fn concat_checked(a: &Bits, b: &Bits) -> Result<Bits, EvalError> {
    if a.len() + b.len() > MAX_QUBITS {
        return Err(EvalError::StateTooLong);
    }
    Ok(a.concat(b))
}

impl Run {
    fn check_depth(&self, depth: usize) -> Result<(), EvalError> {
        if depth > self.cfg.max_recursion_depth {
            Err(EvalError::RecursionDepthExceeded(self.cfg.max_recursion_depth))
        } else {
            Ok(())
        }
    }

    /// Evaluation on a basis ket, memoized.
    fn basis(&mut self, t: &Term, b: Bits, depth: usize) -> Result<State, EvalError> {
        let key = (t as *const Term as usize, b.len() as u8, b.value());
        if let Some(s) = self.memo.get(&key) {
            return Ok(s.clone());
        }
        let out = self.basis_uncached(t, b, depth)?;
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn basis_uncached(&mut self, t: &Term, b: Bits, depth: usize) -> Result<State, EvalError> {
        match t {
            Term::CfqRec(c) => self.cfq_basis(t, c, b, depth),
            Term::LCompo(r0, g) => {
                let Some(v) = parse_code(&b, r0) else {
                    return Ok(State::basis(b));
                };
                let lphi = v.data.len();
                let k = ilog(lphi);
                if v.x.is_empty() || lphi <= 1 || v.x.len() > r0.len() * k {
                    return Ok(State::basis(b));
                }
                let mut s = self.basis(g, b, depth)?;
                for _ in 1..k {
                    s = self.state(g, &s, depth)?;
                }
                Ok(s)
            }
            Term::CodeSkipPlus(r0, g, h) => {
                let Some(v) = parse_code(&b, r0) else {
                    return Ok(State::basis(b));
                };
                let left = self.basis(g, v.code(), depth)?;
                let right = self.basis(h, v.data, depth)?;
                Ok(tensor(&left, &right))
            }
            Term::CodeSkipMinus(r0, g, h) => {
                let Some(v) = parse_code(&b, r0) else {
                    return Ok(State::basis(b));
                };
                let left = self.basis(g, v.x, depth)?;
                let right = self.basis(h, v.r0.concat(&v.data), depth)?;
                Ok(tensor(&left, &right))
            }
            Term::CodeRemove(r0) => Ok(State::basis(match parse_code(&b, r0) {
                Some(v) if !v.x.is_empty() => {
                    let (a, rest) = v.x.split_at(1);
                    rest.concat(&a).concat(&v.r0).concat(&v.data)
                }
                _ => b,
            })),
            Term::CodeRep(r0) => Ok(State::basis(match parse_code(&b, r0) {
                Some(v) if !v.x.is_empty() => {
                    let (u, last) = v.x.split_at(v.x.len() - 1);
                    last.concat(&u).concat(&v.r0).concat(&v.data)
                }
                _ => b,
            })),
            Term::CodeControlled(r0, f) => {
                let Some(v) = parse_code(&b, r0) else {
                    return Ok(State::basis(b));
                };
                let lphi = v.data.len();
                if v.x.len() <= 2 || lphi <= 1 || v.x.len() > r0.len() * ilog(lphi) {
                    return Ok(State::basis(b));
                }
                let code = self.basis(f, v.code(), depth)?;
                Ok(tensor(&code, &State::basis(v.data)))
            }
            _ => self.state_direct(t, &State::basis(b), depth),
        }
    }

    /// Evaluation on an arbitrary state.
    fn state(&mut self, t: &Term, phi: &State, depth: usize) -> Result<State, EvalError> {
        if phi.is_null() {
            return Ok(State::null());
        }
        match t {
            Term::CfqRec(_)
            | Term::LCompo(..)
            | Term::CodeSkipPlus(..)
            | Term::CodeSkipMinus(..)
            | Term::CodeRemove(_)
            | Term::CodeRep(_)
            | Term::CodeControlled(..) => per_basis(phi, |y| self.basis(t, y, depth)),
            _ => self.state_direct(t, phi, depth),
        }
    }

    fn state_direct(&mut self, t: &Term, phi: &State, depth: usize) -> Result<State, EvalError> {
        if phi.is_null() {
            return Ok(State::null());
        }
        let n = phi.len();
        match t {
            Term::Ident => Ok(phi.clone()),
            Term::Phase(th) => {
                if n == 0 {
                    return Ok(phi.clone());
                }
                let (c, s) = th.cos_sin();
                let e = amp(c, s);
                let top = 1u128 << (n - 1);
                let mut out = State::zero(n);
                for (k, a) in phi.raw_iter() {
                    out.add_amp(k, if k & top != 0 { a * e } else { a });
                }
                Ok(out)
            }
            Term::Rot(th) => {
                if n == 0 {
                    return Ok(phi.clone());
                }
                let (c, s) = th.cos_sin();
                let top = 1u128 << (n - 1);
                let mut out = State::zero(n);
                for (k, a) in phi.raw_iter() {
                    let rest = k & !top;
                    if k & top == 0 {
                        out.add_amp(rest, a * c);
                        out.add_amp(rest | top, a * s);
                    } else {
                        out.add_amp(rest, a * -s);
                        out.add_amp(rest | top, a * c);
                    }
                }
                Ok(out)
            }
            Term::Not => {
                if n == 0 {
                    return Ok(phi.clone());
                }
                let top = 1u128 << (n - 1);
                Ok(phi.map_keys(n, |b| Bits::new(n, b.value() ^ top)))
            }
            Term::Swap => {
                if n <= 1 {
                    return Ok(phi.clone());
                }
                Ok(phi.map_keys(n, |b| b.swap_bits(0, 1)))
            }
            Term::Meas(a) => {
                if n == 0 {
                    return Ok(phi.clone());
                }
                let top = 1u128 << (n - 1);
                let mut out = State::zero(n);
                for (k, x) in phi.raw_iter() {
                    if (k & top != 0) == *a {
                        out.add_amp(k, x);
                    }
                }
                Ok(out)
            }
            Term::Compo(g, h) => {
                let mid = self.state(h, phi, depth)?;
                self.state(g, &mid, depth)
            }
            Term::Branch(g, h) => {
                if n <= 1 {
                    return Ok(phi.clone());
                }
                let mut out = State::zero(n);
                for (p, sub) in phi.split_prefix(1) {
                    let r = if p.get(0) {
                        self.state(h, &sub, depth)?
                    } else {
                        self.state(g, &sub, depth)?
                    };
                    self.accumulate(&mut out, &State::basis(p), &r)?;
                }
                Ok(out)
            }
            Term::HalfD(g, h) => self.half_d(g, None, h, None, phi, depth),
            Term::MidApp(k, h) => self.mid_app(*k, h, phi, depth),
            Term::DivConq(c) => self.div_conq(t, c, phi, depth),
            Term::Named(_) => {
                // Evaluators expand named nodes up front; a stray one is
                // evaluated with a private memo because its expansion is a
                // temporary whose node addresses must not enter this memo.
                let exp = t.expand_named()?;
                let mut sub = Run {
                    cfg: self.cfg,
                    memo: BTreeMap::new(),
                };
                sub.state(&exp, phi, depth)
            }
            Term::CfqRec(_)
            | Term::LCompo(..)
            | Term::CodeSkipPlus(..)
            | Term::CodeSkipMinus(..)
            | Term::CodeRemove(_)
            | Term::CodeRep(_)
            | Term::CodeControlled(..) => per_basis(phi, |y| self.basis(t, y, depth)),
        }
    }

    /// `out += left ⊗ right`, checking lengths.
    fn accumulate(&self, out: &mut State, left: &State, right: &State) -> Result<(), EvalError> {
        let piece = tensor(left, right);
        if piece.is_null() {
            return Ok(());
        }
        if piece.len() != out.len() {
            return Err(EvalError::LengthMismatch {
                expected: out.len(),
                found: piece.len(),
            });
        }
        out.add_scaled(&piece, one());
        Ok(())
    }

    /// `Σ_s F1(|s⟩) ⊗ F2(⟨s|φ⟩)` over the first ⌈ℓ/2⌉ qubits; a `Some(dc)`
    /// slot recurses into the divide-and-conquer term `dc`.
    fn half_d(
        &mut self,
        g: &Term,
        g_self: Option<&Term>,
        h: &Term,
        h_self: Option<&Term>,
        phi: &State,
        depth: usize,
    ) -> Result<State, EvalError> {
        let n = phi.len();
        if n <= 1 {
            return Ok(phi.clone());
        }
        let lh = half_lengths(n).lh;
        let mut out = State::zero(n);
        for (s, sub) in phi.split_prefix(lh) {
            let left = match g_self {
                Some(dc) => self.state(dc, &State::basis(s), depth + 1)?,
                None => self.basis(g, s, depth)?,
            };
            let right = match h_self {
                Some(dc) => self.state(dc, &sub, depth + 1)?,
                None => self.state(h, &sub, depth)?,
            };
            self.accumulate(&mut out, &left, &right)?;
        }
        Ok(out)
    }

    fn mid_app(&mut self, k: usize, h: &Term, phi: &State, depth: usize) -> Result<State, EvalError> {
        let n = phi.len();
        let fwd = phi.map_keys(n, |b| mid_swap(b, k, false));
        let mid = self.state(h, &fwd, depth)?;
        if mid.is_null() {
            return Ok(mid);
        }
        let m = mid.len();
        Ok(mid.map_keys(m, |b| mid_swap(b, k, true)))
    }

    fn div_conq(&mut self, me: &Term, c: &DivConq, phi: &State, depth: usize) -> Result<State, EvalError> {
        self.check_depth(depth)?;
        if phi.len() <= c.k {
            return self.state(&c.g, phi, depth);
        }
        let pre = self.state(&c.p, phi, depth)?;
        let slot = |f: FSlot| if f == FSlot::SelfRef { Some(me) } else { None };
        let halves = self.half_d(&Term::Ident, slot(c.f1), &Term::Ident, slot(c.f2), &pre, depth)?;
        self.mid_app(c.k, &c.h, &halves, depth)
    }

    fn cfq_basis(&mut self, me: &Term, c: &CfqRec, y: Bits, depth: usize) -> Result<State, EvalError> {
        self.check_depth(depth)?;
        let Some(v) = parse_code(&y, &c.r0) else {
            return Ok(State::basis(y));
        };
        let r = c.r0.len();
        let lphi = v.data.len();
        let xl = v.x.len();
        if v.x.is_empty() || lphi <= c.t || (c.bound == CodeBound::Log && xl > r * ilog(lphi)) {
            return self.basis(&c.g, y, depth);
        }
        let code = v.code();
        let d_out = self.basis(&c.d, code, depth)?;
        let mut out = State::zero(y.len());
        for (c2, beta) in d_out.iter() {
            let valid = matches!(parse_code(&c2, &c.r0), Some(w) if w.data.is_empty() && w.x.len() == xl);
            if !valid {
                if beta.norm() <= self.cfg.tolerance {
                    continue;
                }
                return Err(EvalError::InvalidPermutationD { code, found: c2 });
            }
            let (u, w) = c2.split_at(r);
            let ui = u.value() as usize;
            let (data, m) = match c.p[ui] {
                PSlot::Ident => (v.data, half_lengths(lphi).lh),
                PSlot::HalfSwap => (half_swap_bits(v.data, false), half_lengths(lphi).rh),
            };
            let (s, rest) = data.split_at(m);
            let ws = w.concat(&s);
            let zeta = match c.f[ui] {
                FSlot::SelfRef => self.basis(me, ws, depth + 1)?,
                FSlot::Ident => State::basis(ws),
            };
            for (z, gamma) in zeta.iter() {
                let (vv, t2) = z.split_at(xl);
                let tail = t2.concat(&rest);
                let tail = match c.p[ui] {
                    PSlot::Ident => tail,
                    PSlot::HalfSwap => half_swap_bits(tail, true),
                };
                let hv = self.basis(&c.h, concat_checked(&u, &vv)?, depth)?;
                let piece = tensor(&hv, &State::basis(tail));
                if piece.is_null() {
                    continue;
                }
                if piece.len() != out.len() {
                    return Err(EvalError::LengthMismatch {
                        expected: out.len(),
                        found: piece.len(),
                    });
                }
                out.add_scaled(&piece, beta * gamma);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Measurement and sampling
// ---------------------------------------------------------------------------

/// `‖⟨b|φ⟩‖²`: the unnormalized weight of outcome b on the first qubit.
pub fn first_qubit_weight(phi: &State, b: bool) -> Result<f64, MeasureError> {
    if phi.is_null() || phi.len() == 0 {
        return Err(MeasureError::NoQubit);
    }
    let top = 1u128 << (phi.len() - 1);
    Ok(phi
        .raw_iter()
        .filter(|(k, _)| (k & top != 0) == b)
        .fold(0.0, |acc, (_, a)| acc + a.norm_sqr()))
}

/// Probability `‖⟨b|φ⟩‖² / ‖φ‖²` of observing b on the first qubit.
pub fn measure_first_qubit(phi: &State, b: bool) -> Result<f64, MeasureError> {
    let w = first_qubit_weight(phi, b)?;
    let total = phi.norm_sqr();
    if total == 0.0 {
        return Err(MeasureError::ZeroNorm);
    }
    Ok(w / total)
}

fn draw(phi: &State, total: f64, rng: &mut ChaCha8Rng) -> Bits {
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (b, a) in phi.iter() {
        acc += a.norm_sqr();
        last = Some(b);
        if target < acc {
            return b;
        }
    }
    last.expect("nonempty state")
}

/// Draws one basis string with probability `|α|²/‖φ‖²`, deterministically in
/// the seed.
pub fn sample(phi: &State, seed: u64) -> Result<Bits, MeasureError> {
    Ok(sample_shots(phi, seed, 1)?.remove(0))
}

/// Draws `shots` basis strings from one seeded generator.
pub fn sample_shots(phi: &State, seed: u64, shots: usize) -> Result<Vec<Bits>, MeasureError> {
    let total = phi.norm_sqr();
    if total == 0.0 || !total.is_finite() {
        return Err(MeasureError::ZeroNorm);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| draw(phi, total, &mut rng)).collect())
}
