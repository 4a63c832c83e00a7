//! Exhaustive contract checks for the standard algorithms, shared by the
//! command-line demos and the acceptance tests.

use alloc::vec::Vec;

use crate::codec::{bin_k, hat, tilde_encode, Symbol};
use crate::eval::{measure_first_qubit, EvalConfig, EvalError, Evaluator};
use crate::oracle::{majority_count, parity};
use crate::qstate::{tensor, Amp, Bits, State};
use crate::schema::{branch, compo, Angle, Term};
use crate::stdlib::{self, BuildError};

/// Largest index length accepted by the BinSearch and majority demos.
pub const MAX_DEMO_K: usize = 4;

/// Largest input length accepted by the parity demo.
pub const MAX_PARITY_N: usize = 16;

/// Failures while running a demo.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DemoError {
    /// A parameter is outside the supported range.
    #[error("parameter out of range: {0}")]
    Range(&'static str),
    /// The algorithm term could not be built.
    #[error(transparent)]
    Build(#[from] BuildError),
    /// Evaluation failed.
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Aggregate of an exhaustive check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    /// Cases that met the contract.
    pub passed: usize,
    /// Cases checked.
    pub total: usize,
}

impl Tally {
    fn record(&mut self, ok: bool) {
        self.total += 1;
        if ok {
            self.passed += 1;
        }
    }

    /// Whether every case passed.
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

fn kets(parts: &[Bits]) -> State {
    parts
        .iter()
        .fold(State::basis(Bits::EMPTY), |acc, b| tensor(&acc, &State::basis(*b)))
}

/// The EPR circuit `Branch(I, NOT) ∘ Rot(π/4)`.
pub fn epr_term() -> Term {
    compo(branch(Term::Ident, Term::Not), Term::Rot(Angle::pi_frac(1, 4)))
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn epr_expected() -> State {
    let a = Amp::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut st = State::basis(Bits::new(2, 0)).scaled(a);
    st.add_scaled(&State::basis(Bits::new(2, 3)), a);
    st
}

/// Input `|x̃⟩|b̂⟩|2̂⟩|s⟩` of BinSearch for `x = bin_k(m)`.
pub fn bin_search_input(k: usize, m: u128, b: bool, s: Bits) -> Result<State, DemoError> {
    let x = bin_k(k, m).map_err(|_| DemoError::Range("m must lie in 1..=2^k"))?;
    Ok(kets(&[
        tilde_encode(&x, false),
        hat(Symbol::of_bit(b)),
        hat(Symbol::Two),
        s,
    ]))
}

/// One BinSearch case: the outcome and whether it met the contract.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSearchCase {
    /// Index (1-based).
    pub m: u128,
    /// The bit register's initial value.
    pub b: bool,
    /// The searched string.
    pub s: Bits,
    /// The expected output bit `b ⊕ s_(m)`.
    pub expected_bit: bool,
    /// Distance between output and expected output.
    pub error: f64,
}

/// Runs BinSearch on every `(m, s, b)` with `|s| = 2^k`, calling `visit` per
/// case.
pub fn bin_search_cases(k: usize, tol: f64, mut visit: impl FnMut(&BinSearchCase)) -> Result<Tally, DemoError> {
    if k == 0 || k > MAX_DEMO_K {
        return Err(DemoError::Range("k must lie in 1..=4"));
    }
    let mut ev = Evaluator::new(&stdlib::bin_search(), EvalConfig::default())?;
    let n = 1usize << k;
    let mut tally = Tally::default();
    for m in 1..=(1u128 << k) {
        for sv in 0..(1u128 << n) {
            let s = Bits::new(n, sv);
            for b in [false, true] {
                let out = ev.eval(&bin_search_input(k, m, b, s)?)?;
                let expected_bit = b ^ s.get(m as usize - 1);
                let want = bin_search_input(k, m, expected_bit, s)?;
                let case = BinSearchCase {
                    m,
                    b,
                    s,
                    expected_bit,
                    error: out.distance(&want),
                };
                tally.record(case.error <= tol);
                visit(&case);
            }
        }
    }
    Ok(tally)
}

/// Checks that the first output qubit of the divide-and-conquer parity term
/// equals the parity of x with probability `1 ± tol`, for all `1 ≤ |x| ≤ n`.
pub fn parity_cases(max_n: usize, tol: f64) -> Result<Tally, DemoError> {
    parity_cases_in(1..=max_n, tol)
}

/// [`parity_cases`] restricted to the given lengths.
pub fn parity_cases_in(lengths: impl IntoIterator<Item = usize>, tol: f64) -> Result<Tally, DemoError> {
    let mut ev = Evaluator::new(&stdlib::parity_dc(), EvalConfig::default())?;
    let mut tally = Tally::default();
    for n in lengths {
        if n == 0 || n > MAX_PARITY_N {
            return Err(DemoError::Range("parity lengths must lie in 1..=16"));
        }
        for v in 0..(1u128 << n) {
            let x = Bits::new(n, v);
            let out = ev.eval(&State::basis(x))?;
            let p = measure_first_qubit(&out, parity(&x)).unwrap_or(0.0);
            tally.record((p - 1.0).abs() <= tol);
        }
    }
    Ok(tally)
}

/// Input `|0⁶⟩|0^{3k}⟩|⊣̂⟩|x⟩` of the majority term.
pub fn majority_input(x: &Bits) -> Result<State, DemoError> {
    let k = x.len().trailing_zeros() as usize;
    if x.len() != 1usize << k || k == 0 || k > MAX_DEMO_K {
        return Err(DemoError::Range("|x| must be 2^k with 1 ≤ k ≤ 4"));
    }
    Ok(kets(&[Bits::zeros(6 + 3 * k), hat(Symbol::End), *x]))
}

/// One row of the majority demo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorityRow {
    /// The input string.
    pub x: Bits,
    /// `(#_0(x), #_1(x))`.
    pub counts: (usize, usize),
    /// Probabilities of reading 0 and 1 on the first output qubit.
    pub p: [f64; 2],
    /// The majority bit `b_x` when x satisfies the ε-promise.
    pub promise: Option<bool>,
}

impl MajorityRow {
    /// Whether `p_b ≥ (#_b/2^k)² − tol` for both b.
    pub fn meets_bound(&self, tol: f64) -> bool {
        let n = (self.counts.0 + self.counts.1) as f64;
        let c = [self.counts.0 as f64, self.counts.1 as f64];
        (0..2).all(|b| self.p[b] >= (c[b] / n) * (c[b] / n) - tol)
    }

    /// Whether a promise row reaches `1 − ε` (true for non-promise rows).
    pub fn meets_promise(&self, eps: f64, tol: f64) -> bool {
        match self.promise {
            Some(b) => self.p[b as usize] >= 1.0 - eps - tol,
            None => true,
        }
    }
}

/// The bit b with `#_b(x) ≥ √(1−ε)·|x|`, if any.
pub fn majority_promise(x: &Bits, eps: f64) -> Option<bool> {
    let (c0, c1) = majority_count(x);
    let need = libm::sqrt(1.0 - eps) * x.len() as f64;
    if c1 as f64 >= need {
        Some(true)
    } else if c0 as f64 >= need {
        Some(false)
    } else {
        None
    }
}

/// Runs the majority term on every `x ∈ {0,1}^{2^k}`.
pub fn majority_rows(k: usize, eps: f64) -> Result<Vec<MajorityRow>, DemoError> {
    if k == 0 || k > MAX_DEMO_K {
        return Err(DemoError::Range("k must lie in 1..=4"));
    }
    let mut ev = Evaluator::new(&stdlib::majority(eps)?, EvalConfig::default())?;
    let n = 1usize << k;
    let mut rows = Vec::with_capacity(1 << n);
    for v in 0..(1u128 << n) {
        let x = Bits::new(n, v);
        let out = ev.eval(&majority_input(&x)?)?;
        let p0 = measure_first_qubit(&out, false).unwrap_or(0.0);
        let p1 = measure_first_qubit(&out, true).unwrap_or(0.0);
        rows.push(MajorityRow {
            x,
            counts: majority_count(&x),
            p: [p0, p1],
            promise: majority_promise(&x, eps),
        });
    }
    Ok(rows)
}
