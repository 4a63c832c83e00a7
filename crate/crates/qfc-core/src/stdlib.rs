//! Builders for the standard constructions: basic gates, qubit permutations,
//! code-handling macros built on the fast recursion, and the search,
//! majority and parity algorithms.
//!
//! Every builder returns an ordinary [`Term`] so that evaluation, validation,
//! complexity and inversion treat library functions like any other term.
//! [`Builder`] names a construction with its parameters; it is what
//! `(named …)` nodes in term files refer to.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::codec::{hat, Symbol};
use crate::qstate::Bits;
use crate::schema::{
    atom, branch, compo, invert, parse_angle_arg, parse_bits_arg, parse_nat_arg, term_of_sexpr, Angle, CfqRec,
    CodeBound, DivConq, FSlot, PSlot, ParseError, ParseErrorKind, Pos, Sexpr, Term,
};

/// A builder parameter was out of range.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("builder `{builder}`: {message}")]
pub struct BuildError {
    /// The builder name.
    pub builder: &'static str,
    /// What was wrong.
    pub message: String,
}

fn bad(builder: &'static str, message: impl Into<String>) -> BuildError {
    BuildError {
        builder,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Basic gates
// ---------------------------------------------------------------------------

/// Controlled NOT: `|a⟩|φ⟩ ↦ |a⟩ ⊗ NOT^a(φ)`.
pub fn cnot() -> Term {
    branch(Term::Ident, Term::Not)
}

/// Global phase shift `e^{iθ}` (on inputs of length ≥ 1).
pub fn gps(theta: Angle) -> Term {
    compo(
        Term::Not,
        compo(Term::Phase(theta), compo(Term::Not, Term::Phase(theta))),
    )
}

/// Walsh–Hadamard on the first qubit.
pub fn wh() -> Term {
    compo(Term::Rot(Angle::pi_frac(1, 4)), Term::Phase(Angle::pi()))
}

/// Phase `e^{iθ}` on the `|0⟩` component of the first qubit.
pub fn z1(theta: Angle) -> Term {
    compo(Term::Not, compo(Term::Phase(theta), Term::Not))
}

/// Rotation around the z axis: `|0⟩ ↦ e^{iθ}|0⟩`, `|1⟩ ↦ e^{−iθ}|1⟩`.
pub fn zrot(theta: Angle) -> Term {
    compo(z1(theta), Term::Phase(theta.neg()))
}

/// Controlled rotation.
pub fn c_rot(theta: Angle) -> Term {
    branch(Term::Ident, Term::Rot(theta))
}

/// Controlled phase: `|1⟩|1⟩` picks up `e^{iθ}`.
pub fn cphase(theta: Angle) -> Term {
    branch(Term::Ident, Term::Phase(theta))
}

/// Controlled swap of qubits 2 and 3.
pub fn cswap() -> Term {
    branch(Term::Ident, Term::Swap)
}

fn skip_raw(k: usize, g: Term) -> Term {
    let mut t = g;
    for _ in 0..k {
        t = branch(t.clone(), t);
    }
    t
}

/// `Skip_k[g]`: applies g past the first k qubits (identity on inputs of
/// length ≤ k).
pub fn skip(k: usize, g: Term) -> Result<Term, BuildError> {
    if k == 0 {
        return Err(bad("skip", "k must be at least 1"));
    }
    Ok(skip_raw(k, g))
}

/// `LengthQ_k`: `|b⟩|φ⟩ ↦ |1−b⟩|φ⟩` if `ℓ(φ) ≥ k`, unchanged otherwise.
pub fn length_q(k: usize) -> Result<Term, BuildError> {
    if k == 0 {
        return Err(bad("length_q", "k must be at least 1"));
    }
    let mut t = Term::Not;
    for _ in 0..k {
        t = compo(Term::Swap, compo(skip_raw(1, t), Term::Swap));
    }
    Ok(t)
}

/// `SWAP_{a,a+1}` for a ≥ 1.
fn swap_adj(a: usize) -> Term {
    skip_raw(a - 1, Term::Swap)
}

/// Composition `t_1 ∘ t_2 ∘ … ∘ t_n` (t_n first); the identity when empty.
fn compose_all(ts: Vec<Term>) -> Term {
    let mut it = ts.into_iter().rev();
    let Some(mut acc) = it.next() else {
        return Term::Ident;
    };
    for t in it {
        acc = compo(t, acc);
    }
    acc
}

/// `SWAP_{i,j}`: exchanges qubits i and j (1-based, i ≤ j); identity on
/// inputs shorter than j.
pub fn swap_ij(i: usize, j: usize) -> Result<Term, BuildError> {
    if i == 0 || i > j {
        return Err(bad("swap_ij", format!("need 1 ≤ i ≤ j, got i={i}, j={j}")));
    }
    if i == j {
        return Ok(Term::Ident);
    }
    // MOVE_{1,n} = SWAP_{1,2} ∘ … ∘ SWAP_{n−1,n} brings qubit n to the front;
    // its inverse sends the front qubit to position n.
    let mv = |n: usize| compose_all((1..n).map(swap_adj).collect());
    let mv_inv = |n: usize| compose_all((1..n).rev().map(swap_adj).collect());
    let n = j - i + 1;
    let front = if n == 2 {
        Term::Swap
    } else {
        compo(mv(n), mv_inv(n - 1))
    };
    Ok(skip_raw(i - 1, front))
}

/// `SecSWAP^{(k)}_{i,j}`: exchanges the i-th and j-th k-bit sections.
pub fn sec_swap(k: usize, i: usize, j: usize) -> Result<Term, BuildError> {
    if k == 0 || i == 0 || i > j {
        return Err(bad(
            "sec_swap",
            format!("need k ≥ 1 and 1 ≤ i ≤ j, got k={k}, i={i}, j={j}"),
        ));
    }
    let mut parts = Vec::new();
    for t in 1..=k {
        parts.push(swap_ij((i - 1) * k + t, (j - 1) * k + t)?);
    }
    Ok(compose_all(parts))
}

/// `SecMOVE^{(k)}_{i,j}`: moves the i-th k-bit section to position j,
/// shifting sections i+1..j one place forward.
pub fn sec_move(k: usize, i: usize, j: usize) -> Result<Term, BuildError> {
    if k == 0 || i == 0 || i > j {
        return Err(bad(
            "sec_move",
            format!("need k ≥ 1 and 1 ≤ i ≤ j, got k={k}, i={i}, j={j}"),
        ));
    }
    let mut parts = Vec::new();
    for a in (i..j).rev() {
        parts.push(sec_swap(k, a, a + 1)?);
    }
    Ok(compose_all(parts))
}

/// `COPY_k`: `|x⟩|z⟩|ψ⟩ ↦ |x ⊕ z⟩|z⟩|ψ⟩` for k-bit x and z.
pub fn copy(k: usize) -> Result<Term, BuildError> {
    if k == 0 {
        return Err(bad("copy", "k must be at least 1"));
    }
    let copy1 = compo(Term::Swap, compo(cnot(), Term::Swap));
    let mut t = copy1.clone();
    for n in 2..=k {
        // Q brings z_1 next to x_1: SWAP_{2,3} ∘ … ∘ SWAP_{n,n+1}.
        let q = compose_all((2..=n).map(swap_adj).collect());
        let q_inv = compose_all((2..=n).rev().map(swap_adj).collect());
        t = compose_all(vec![q_inv, skip_raw(2, t), copy1.clone(), q]);
    }
    Ok(t)
}

/// `g_OR`: `|0⟩|x⟩|y⟩ ↦ |x ∨ y⟩|·⟩|x⟩` with the OR landing in the first qubit.
pub fn g_or() -> Term {
    let copy1 = copy(1).expect("k = 1");
    compose_all(vec![swap_ij(1, 3).expect("1 < 3"), cswap(), copy1])
}

/// `g_AND`: `|0⟩|x⟩|y⟩ ↦ |x ∧ y⟩|·⟩|x⟩` with the AND landing in the first qubit.
pub fn g_and() -> Term {
    let copy1 = copy(1).expect("k = 1");
    compose_all(vec![
        swap_ij(1, 3).expect("1 < 3"),
        swap_ij(2, 3).expect("2 < 3"),
        cswap(),
        copy1,
    ])
}

/// `g_1 ∘ g_2 ∘ … ∘ g_n` (g_n applied first).
pub fn compo_multi(gs: Vec<Term>) -> Result<Term, BuildError> {
    if gs.is_empty() {
        return Err(bad("compo_multi", "needs at least one term"));
    }
    Ok(compose_all(gs))
}

/// `Branch_k`: selects `g_u` by the first k qubits u (terms listed in
/// lexicographic order of u; 2^k of them).
pub fn branch_k(k: usize, gs: Vec<Term>) -> Result<Term, BuildError> {
    if k == 0 || k > 12 || gs.len() != 1usize << k {
        return Err(bad(
            "branch_k",
            format!("need 1 ≤ k ≤ 12 and 2^k terms, got k={k} with {} terms", gs.len()),
        ));
    }
    let mut layer = gs;
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len() / 2);
        let mut it = layer.into_iter();
        while let (Some(a), Some(b)) = (it.next(), it.next()) {
            next.push(branch(a, b));
        }
        layer = next;
    }
    Ok(layer.pop().expect("one term left"))
}

// ---------------------------------------------------------------------------
// Code macros
// ---------------------------------------------------------------------------

fn table<T: Copy>(r0: &Bits, default: T, special: &[(u128, T)]) -> Vec<T> {
    let mut v = vec![default; 1usize << r0.len()];
    for (u, x) in special {
        v[*u as usize] = *x;
    }
    v
}

fn cfq(r0: Bits, d: Term, g: Term, h: Term, p: Vec<PSlot>, f: Vec<FSlot>, bound: CodeBound) -> Term {
    Term::CfqRec(Box::new(CfqRec {
        t: 1,
        r0,
        d,
        g,
        h,
        p,
        f,
        bound,
    }))
}

fn check_r0(builder: &'static str, r0: &Bits) -> Result<(), BuildError> {
    if r0.is_empty() || r0.len() > crate::schema::MAX_R0_LEN {
        return Err(bad(
            builder,
            format!("separator length must be in 1..={}", crate::schema::MAX_R0_LEN),
        ));
    }
    Ok(())
}

/// `SIZE_{r0}`: `|0^{m|r0|} r0⟩|φ⟩ ↦ |0^{k|r0|} r0⟩|0^{(m−k−1)|r0|} r0⟩|φ⟩`
/// with `k = ilog ℓ(φ)`, for `m ≥ 1` and `ℓ(φ) ≤ 2^{m−1}`.
pub fn size(r0: Bits) -> Result<Term, BuildError> {
    check_r0("size", &r0)?;
    if r0.count_ones() == 0 {
        return Err(bad("size", "separator must contain a 1"));
    }
    let g = if r0.len() == 1 {
        length_q(1)?
    } else {
        // Turn the leading zero block into a copy of r0.
        compose_all(
            (0..r0.len())
                .filter(|&i| r0.get(i))
                .map(|i| if i == 0 { Term::Not } else { skip_raw(i, Term::Not) })
                .collect(),
        )
    };
    let f = table(&r0, FSlot::Ident, &[(0, FSlot::SelfRef)]);
    Ok(cfq(
        r0,
        Term::Ident,
        g,
        Term::Ident,
        table(&r0, PSlot::Ident, &[]),
        f,
        CodeBound::Unbounded,
    ))
}

/// Code lift: `|x r0⟩|φ⟩ ↦ g(|x r0⟩) ⊗ |φ⟩` for a measurement-free g that
/// acts on `|r0⟩ ⊗ φ` as `g(|r0⟩) ⊗ φ`.
pub fn code_lift(r0: Bits, g: Term) -> Result<Term, BuildError> {
    check_r0("code_lift", &r0)?;
    let g_inv = invert(&g).map_err(|e| bad("code_lift", e.to_string()))?;
    let h = compo(g.clone(), skip_raw(r0.len(), g_inv));
    Ok(cfq(
        r0,
        Term::Ident,
        g,
        h,
        table(&r0, PSlot::Ident, &[]),
        table(&r0, FSlot::SelfRef, &[]),
        CodeBound::Log,
    ))
}

/// Blockwise fold of h over the code: `ĥ(|r0⟩) = |r0⟩`,
/// `ĥ(|u w r0⟩) = h(|u⟩ ⊗ ĥ(|w r0⟩))`, valid while `|x| ≤ |r0| · ilog ℓ(φ)`.
pub fn fold_blocks(r0: Bits, h: Term) -> Result<Term, BuildError> {
    check_r0("fold_blocks", &r0)?;
    Ok(cfq(
        r0,
        Term::Ident,
        Term::Ident,
        h,
        table(&r0, PSlot::Ident, &[]),
        table(&r0, FSlot::SelfRef, &[]),
        CodeBound::Log,
    ))
}

fn hat_u(s: Symbol) -> u128 {
    hat(s).value()
}

fn branch3_on(sym: Symbol, g: Term) -> Term {
    let mut gs = vec![Term::Ident; 8];
    gs[hat_u(sym) as usize] = g;
    branch_k(3, gs).expect("8 terms")
}

/// Simultaneous application:
/// `|Ŝ x̃_1 … x̃_m 2̂⟩|φ⟩ ↦ |Ŝ⟩ ⊗ g_1(|x̃_1⟩) ⊗ … ⊗ g_m(|x̃_m 2̂⟩) ⊗ |φ⟩`
/// while the code fits the length bound.
pub fn multi_apply(gs: Vec<Term>) -> Result<Term, BuildError> {
    if gs.is_empty() {
        return Err(bad("multi_apply", "needs at least one term"));
    }
    let two = hat(Symbol::Two);
    let end = hat(Symbol::End);
    let mut it = gs.into_iter().rev();
    let last = it.next().expect("nonempty");
    let mut acc = Term::CodeSkipPlus(two, Box::new(last), Box::new(Term::Ident));
    for g in it {
        acc = Term::CodeSkipPlus(end, Box::new(g), Box::new(acc));
    }
    Ok(cfq(
        two,
        Term::Ident,
        Term::Ident,
        branch3_on(Symbol::Sep, acc),
        table(&two, PSlot::Ident, &[]),
        table(&two, FSlot::SelfRef, &[]),
        CodeBound::Log,
    ))
}

/// Clock-driven repetition:
/// `|T̂^m Ŝ⟩|x 2̂⟩|φ⟩ ↦ |T̂^m Ŝ⟩ ⊗ g^m(|x 2̂⟩) ⊗ |φ⟩` with `m = ilog ℓ(φ)`.
pub fn clock_repeat(g: Term) -> Result<Term, BuildError> {
    let two = hat(Symbol::Two);
    let step = Term::CodeSkipPlus(hat(Symbol::Sep), Box::new(Term::Ident), Box::new(g));
    Ok(cfq(
        two,
        Term::Ident,
        Term::Ident,
        branch3_on(Symbol::Time, step),
        table(&two, PSlot::Ident, &[]),
        table(&two, FSlot::SelfRef, &[]),
        CodeBound::Unbounded,
    ))
}

// ---------------------------------------------------------------------------
// Algorithms
// ---------------------------------------------------------------------------

/// Binary search: `|x̃⟩|b̂⟩|2̂⟩|s⟩ ↦ |x̃⟩|(b ⊕ s_(m))^⟩|2̂⟩|s⟩` for
/// `x = bin_k(m)` and `|s| = 2^k`.
pub fn bin_search() -> Term {
    let two = hat(Symbol::Two);
    let swap_7_10 = swap_ij(7, 10).expect("7 < 10");
    let g = compose_all(vec![swap_7_10.clone(), skip_raw(5, copy(1).expect("k = 1")), swap_7_10]);
    cfq(
        two,
        Term::Ident,
        g,
        Term::Ident,
        table(&two, PSlot::Ident, &[(hat_u(Symbol::One), PSlot::HalfSwap)]),
        table(&two, FSlot::SelfRef, &[]),
        CodeBound::Unbounded,
    )
}

/// Bit extraction: `|0⁵⟩|b⟩|x̃⟩|s⟩ ↦ |0⁵⟩|b ⊕ s_(m)⟩|x̃⟩|s⟩` for `x = bin_k(m)`,
/// `|s| = 2^k`, extended linearly over the data.
pub fn bit() -> Term {
    let sw = |i, j| swap_ij(i, j).expect("i < j");
    // |0⁵ b⟩ ↦ |b̂⟩|2̂⟩.
    let h = compose_all(vec![
        sw(1, 4),
        sw(2, 5),
        sw(3, 6),
        skip_raw(2, Term::Not),
        skip_raw(1, Term::Not),
        Term::Not,
    ]);
    let h_inv = invert(&h).expect("gate term");
    let sec = |i, j| sec_swap(3, i, j).expect("i < j");
    // A B X ↦ X A B on the first three sections, and its inverse.
    let rot_right = compo(sec(2, 3), sec(1, 3));
    let rot_left = compo(sec(1, 3), sec(2, 3));
    let end = hat(Symbol::End);
    let two = hat(Symbol::Two);
    // |b̂ 2̂ x̂_1 … x̂_k ⊣̂⟩ ↦ |x̂_1 … x̂_k ⊣̂ b̂ 2̂⟩, one block per level.
    let f = cfq(
        end,
        rot_right.clone(),
        rot_right,
        Term::Ident,
        table(&end, PSlot::Ident, &[]),
        table(&end, FSlot::SelfRef, &[]),
        CodeBound::Unbounded,
    );
    // |x̂_1 … x̂_k ⊣̂ b̂ 2̂⟩ ↦ |b̂ 2̂ x̂_1 … x̂_k ⊣̂⟩.
    let f_inv = cfq(
        two,
        Term::Ident,
        rot_left.clone(),
        rot_left,
        table(&two, PSlot::Ident, &[]),
        table(&two, FSlot::SelfRef, &[]),
        CodeBound::Unbounded,
    );
    compose_all(vec![h_inv, f_inv, bin_search(), f, h])
}

/// Index superposition: `|0^{3k}⟩|⊣̂⟩|φ⟩ ↦ 2^{−k/2} Σ_{|x|=k} |x̃⟩|φ⟩` with
/// `k = ilog ℓ(φ)`.
pub fn index_superposition() -> Term {
    let mut gs = vec![Term::Ident; 4];
    gs[0] = wh();
    let h = branch_k(2, gs).expect("4 terms");
    fold_blocks(hat(Symbol::End), h).expect("valid separator")
}

/// Majority test: on `|0⁶⟩|0^{3k}⟩|⊣̂⟩|x⟩` with `|x| = 2^k`, produces a state
/// whose first qubit reads b with probability `#_b(x)/2^k`.
pub fn majority(eps: f64) -> Result<Term, BuildError> {
    if !(0.0..0.75).contains(&eps) {
        return Err(bad("majority", format!("ε must lie in [0, 3/4), got {eps}")));
    }
    let g = index_superposition();
    let g_inv = invert(&g).map_err(|e| bad("majority", e.to_string()))?;
    Ok(compose_all(vec![
        swap_ij(1, 6).expect("1 < 6"),
        skip_raw(6, g_inv),
        bit(),
        skip_raw(6, g),
    ]))
}

/// Parity by divide and conquer: the first output qubit is `⊕_i x_i`.
pub fn parity_dc() -> Term {
    Term::DivConq(Box::new(DivConq {
        k: 1,
        g: Term::Ident,
        h: copy(1).expect("k = 1"),
        p: Term::Ident,
        f1: FSlot::SelfRef,
        f2: FSlot::SelfRef,
    }))
}

// ---------------------------------------------------------------------------
// Named builders
// ---------------------------------------------------------------------------

/// A standard construction with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Builder {
    /// [`cnot`].
    Cnot,
    /// [`gps`].
    Gps(Angle),
    /// [`wh`].
    Wh,
    /// [`z1`].
    Z1(Angle),
    /// [`zrot`].
    Zrot(Angle),
    /// [`c_rot`].
    CRot(Angle),
    /// [`cphase`].
    CPhase(Angle),
    /// [`cswap`].
    Cswap,
    /// [`length_q`].
    LengthQ(usize),
    /// [`swap_ij`].
    SwapIJ(usize, usize),
    /// [`skip`].
    Skip(usize, Box<Term>),
    /// [`sec_swap`].
    SecSwap(usize, usize, usize),
    /// [`sec_move`].
    SecMove(usize, usize, usize),
    /// [`copy`].
    Copy(usize),
    /// [`g_and`].
    GAnd,
    /// [`g_or`].
    GOr,
    /// [`compo_multi`].
    CompoMulti(Vec<Term>),
    /// [`branch_k`].
    BranchK(usize, Vec<Term>),
    /// [`size`].
    Size(Bits),
    /// [`code_lift`].
    CodeLift(Bits, Box<Term>),
    /// [`fold_blocks`].
    FoldBlocks(Bits, Box<Term>),
    /// [`multi_apply`].
    MultiApply(Vec<Term>),
    /// [`clock_repeat`].
    ClockRepeat(Box<Term>),
    /// [`bin_search`].
    BinSearch,
    /// [`bit`].
    Bit,
    /// [`index_superposition`].
    IndexSuperposition,
    /// [`majority`].
    Majority(f64),
    /// [`parity_dc`].
    ParityDc,
}

/// Names accepted by `(named …)`.
pub const BUILDER_NAMES: [&str; 28] = [
    "cnot",
    "gps",
    "wh",
    "z1",
    "zrot",
    "c_rot",
    "cphase",
    "cswap",
    "length_q",
    "swap_ij",
    "skip",
    "sec_swap",
    "sec_move",
    "copy",
    "g_and",
    "g_or",
    "compo_multi",
    "branch_k",
    "size",
    "code_lift",
    "fold_blocks",
    "multi_apply",
    "clock_repeat",
    "bin_search",
    "bit",
    "index_superposition",
    "majority",
    "parity_dc",
];

impl Builder {
    /// The builder's name in term files.
    pub fn name(&self) -> &'static str {
        match self {
            Builder::Cnot => "cnot",
            Builder::Gps(_) => "gps",
            Builder::Wh => "wh",
            Builder::Z1(_) => "z1",
            Builder::Zrot(_) => "zrot",
            Builder::CRot(_) => "c_rot",
            Builder::CPhase(_) => "cphase",
            Builder::Cswap => "cswap",
            Builder::LengthQ(_) => "length_q",
            Builder::SwapIJ(..) => "swap_ij",
            Builder::Skip(..) => "skip",
            Builder::SecSwap(..) => "sec_swap",
            Builder::SecMove(..) => "sec_move",
            Builder::Copy(_) => "copy",
            Builder::GAnd => "g_and",
            Builder::GOr => "g_or",
            Builder::CompoMulti(_) => "compo_multi",
            Builder::BranchK(..) => "branch_k",
            Builder::Size(_) => "size",
            Builder::CodeLift(..) => "code_lift",
            Builder::FoldBlocks(..) => "fold_blocks",
            Builder::MultiApply(_) => "multi_apply",
            Builder::ClockRepeat(_) => "clock_repeat",
            Builder::BinSearch => "bin_search",
            Builder::Bit => "bit",
            Builder::IndexSuperposition => "index_superposition",
            Builder::Majority(_) => "majority",
            Builder::ParityDc => "parity_dc",
        }
    }

    /// Expands the builder into a term (named sub-terms stay named).
    pub fn build(&self) -> Result<Term, BuildError> {
        Ok(match self {
            Builder::Cnot => cnot(),
            Builder::Gps(a) => gps(*a),
            Builder::Wh => wh(),
            Builder::Z1(a) => z1(*a),
            Builder::Zrot(a) => zrot(*a),
            Builder::CRot(a) => c_rot(*a),
            Builder::CPhase(a) => cphase(*a),
            Builder::Cswap => cswap(),
            Builder::LengthQ(k) => length_q(*k)?,
            Builder::SwapIJ(i, j) => swap_ij(*i, *j)?,
            Builder::Skip(k, g) => skip(*k, (**g).clone())?,
            Builder::SecSwap(k, i, j) => sec_swap(*k, *i, *j)?,
            Builder::SecMove(k, i, j) => sec_move(*k, *i, *j)?,
            Builder::Copy(k) => copy(*k)?,
            Builder::GAnd => g_and(),
            Builder::GOr => g_or(),
            Builder::CompoMulti(gs) => compo_multi(gs.clone())?,
            Builder::BranchK(k, gs) => branch_k(*k, gs.clone())?,
            Builder::Size(r0) => size(*r0)?,
            Builder::CodeLift(r0, g) => code_lift(*r0, (**g).clone())?,
            Builder::FoldBlocks(r0, h) => fold_blocks(*r0, (**h).clone())?,
            Builder::MultiApply(gs) => multi_apply(gs.clone())?,
            Builder::ClockRepeat(g) => clock_repeat((**g).clone())?,
            Builder::BinSearch => bin_search(),
            Builder::Bit => bit(),
            Builder::IndexSuperposition => index_superposition(),
            Builder::Majority(eps) => majority(*eps)?,
            Builder::ParityDc => parity_dc(),
        })
    }

    /// Parses the arguments of a `(named …)` form (everything after `named`).
    pub fn from_sexprs(pos: Pos, items: &[Sexpr]) -> Result<Builder, ParseError> {
        let Some(head) = items.first() else {
            return Err(ParseError::arity(pos, "named", "a builder name", 0));
        };
        let name = atom(head, "a builder name")?;
        let a = &items[1..];
        let need = |n: usize| {
            if a.len() == n {
                Ok(())
            } else {
                Err(ParseError::arity(pos, name, n.to_string(), a.len()))
            }
        };
        let terms = |xs: &[Sexpr]| xs.iter().map(term_of_sexpr).collect::<Result<Vec<_>, _>>();
        let b = match name {
            "cnot" | "wh" | "cswap" | "g_and" | "g_or" | "bin_search" | "bit" | "index_superposition" | "parity_dc" => {
                need(0)?;
                match name {
                    "cnot" => Builder::Cnot,
                    "wh" => Builder::Wh,
                    "cswap" => Builder::Cswap,
                    "g_and" => Builder::GAnd,
                    "g_or" => Builder::GOr,
                    "bin_search" => Builder::BinSearch,
                    "bit" => Builder::Bit,
                    "index_superposition" => Builder::IndexSuperposition,
                    _ => Builder::ParityDc,
                }
            }
            "gps" | "z1" | "zrot" | "c_rot" | "cphase" => {
                need(1)?;
                let t = parse_angle_arg(&a[0])?;
                match name {
                    "gps" => Builder::Gps(t),
                    "z1" => Builder::Z1(t),
                    "zrot" => Builder::Zrot(t),
                    "c_rot" => Builder::CRot(t),
                    _ => Builder::CPhase(t),
                }
            }
            "length_q" => {
                need(1)?;
                Builder::LengthQ(parse_nat_arg(&a[0], 1)?)
            }
            "copy" => {
                need(1)?;
                Builder::Copy(parse_nat_arg(&a[0], 1)?)
            }
            "swap_ij" => {
                need(2)?;
                Builder::SwapIJ(parse_nat_arg(&a[0], 1)?, parse_nat_arg(&a[1], 1)?)
            }
            "skip" => {
                need(2)?;
                Builder::Skip(parse_nat_arg(&a[0], 1)?, Box::new(term_of_sexpr(&a[1])?))
            }
            "sec_swap" | "sec_move" => {
                need(3)?;
                let (k, i, j) = (
                    parse_nat_arg(&a[0], 1)?,
                    parse_nat_arg(&a[1], 1)?,
                    parse_nat_arg(&a[2], 1)?,
                );
                if name == "sec_swap" {
                    Builder::SecSwap(k, i, j)
                } else {
                    Builder::SecMove(k, i, j)
                }
            }
            "compo_multi" | "multi_apply" => {
                if a.is_empty() {
                    return Err(ParseError::arity(pos, name, "at least 1", 0));
                }
                if name == "compo_multi" {
                    Builder::CompoMulti(terms(a)?)
                } else {
                    Builder::MultiApply(terms(a)?)
                }
            }
            "branch_k" => {
                if a.is_empty() {
                    return Err(ParseError::arity(pos, name, "k and 2^k terms", 0));
                }
                let k = parse_nat_arg(&a[0], 1)?;
                if k > 12 || a.len() - 1 != 1usize << k {
                    return Err(ParseError::arity(pos, name, "k and 2^k terms", a.len()));
                }
                Builder::BranchK(k, terms(&a[1..])?)
            }
            "size" => {
                need(1)?;
                Builder::Size(parse_bits_arg(&a[0], true)?)
            }
            "code_lift" | "fold_blocks" => {
                need(2)?;
                let r0 = parse_bits_arg(&a[0], true)?;
                let t = Box::new(term_of_sexpr(&a[1])?);
                if name == "code_lift" {
                    Builder::CodeLift(r0, t)
                } else {
                    Builder::FoldBlocks(r0, t)
                }
            }
            "clock_repeat" => {
                need(1)?;
                Builder::ClockRepeat(Box::new(term_of_sexpr(&a[0])?))
            }
            "majority" => {
                need(1)?;
                let s = atom(&a[0], "ε")?;
                let eps: f64 = s
                    .parse()
                    .map_err(|_| ParseError::invalid(a[0].pos(), format!("`{s}` is not a number")))?;
                Builder::Majority(eps)
            }
            other => {
                return Err(ParseError::new(
                    head.pos(),
                    ParseErrorKind::UnknownConstructor(format!("named {other}")),
                ))
            }
        };
        Ok(b)
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, ts: &[Term]) -> fmt::Result {
    for t in ts {
        write!(f, " {t}")?;
    }
    Ok(())
}

impl fmt::Display for Builder {
    /// Renders `<name> <params…>` (the contents of a `(named …)` form).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            Builder::Gps(a) | Builder::Z1(a) | Builder::Zrot(a) | Builder::CRot(a) | Builder::CPhase(a) => {
                write!(f, " {a}")
            }
            Builder::LengthQ(k) | Builder::Copy(k) => write!(f, " {k}"),
            Builder::SwapIJ(i, j) => write!(f, " {i} {j}"),
            Builder::Skip(k, g) => write!(f, " {k} {g}"),
            Builder::SecSwap(k, i, j) | Builder::SecMove(k, i, j) => write!(f, " {k} {i} {j}"),
            Builder::CompoMulti(gs) | Builder::MultiApply(gs) => write_terms(f, gs),
            Builder::BranchK(k, gs) => {
                write!(f, " {k}")?;
                write_terms(f, gs)
            }
            Builder::Size(r0) => write!(f, " {r0}"),
            Builder::CodeLift(r0, g) | Builder::FoldBlocks(r0, g) => write!(f, " {r0} {g}"),
            Builder::ClockRepeat(g) => write!(f, " {g}"),
            Builder::Majority(eps) => write!(f, " {eps:?}"),
            Builder::Cnot
            | Builder::Wh
            | Builder::Cswap
            | Builder::GAnd
            | Builder::GOr
            | Builder::BinSearch
            | Builder::Bit
            | Builder::IndexSuperposition
            | Builder::ParityDc => Ok(()),
        }
    }
}
