//! Helpers shared by the integration tests.

#![allow(dead_code)]

use proptest::prelude::*;
use qfc_core::eval::{EvalConfig, Evaluator};
use qfc_core::schema::{parse_term, Term};
use qfc_core::{Amp, Bits, State};

/// Proptest strategy: a state of length `n ∈ lens` with up to `max_terms`
/// components (not normalized; may be the zero vector only if all draws are 0).
pub fn arb_state(lens: std::ops::RangeInclusive<usize>, max_terms: usize) -> impl Strategy<Value = State> {
    lens.prop_flat_map(move |n| {
        let key = if n == 0 {
            Just(0u128).boxed()
        } else {
            (0u128..(1u128 << n)).boxed()
        };
        prop::collection::vec((key, -1.0f64..1.0, -1.0f64..1.0), 1..=max_terms).prop_map(move |items| {
            State::from_amplitudes(
                n,
                items.into_iter().map(|(k, re, im)| (Bits::new(n, k), Amp::new(re, im))),
            )
        })
    })
}

/// Proptest strategy: a unit state.
pub fn arb_unit_state(lens: std::ops::RangeInclusive<usize>, max_terms: usize) -> impl Strategy<Value = State> {
    arb_state(lens, max_terms)
        .prop_filter("nonzero", |s| s.norm() > 1e-3)
        .prop_map(|s| {
            let n = s.norm();
            s.scaled(Amp::new(1.0 / n, 0.0))
        })
}

/// Checks that `term` maps every basis ket of length `n` to the basis ket
/// `expected(x)` with amplitude exactly 1; returns the first mismatch.
pub fn check_basis_map(term: &Term, n: usize, expected: impl Fn(Bits) -> Bits) -> Result<(), String> {
    let mut ev = Evaluator::new(term, EvalConfig::default()).map_err(|e| e.to_string())?;
    for v in 0..(1u128 << n) {
        let x = Bits::new(n, v);
        let out = ev.eval(&State::basis(x)).map_err(|e| e.to_string())?;
        let want = State::basis(expected(x));
        if out.distance(&want) > 1e-12 {
            return Err(format!("{term} on |{x}⟩: got {out:?}, want |{}⟩", expected(x)));
        }
    }
    Ok(())
}

/// Parses a bit literal.
pub fn b(s: &str) -> Bits {
    s.parse().expect("bit literal")
}

// ---------------------------------------------------------------------------
// Classical reference permutations (0-based positions).
// ---------------------------------------------------------------------------

pub fn ref_swap(x: Bits, i: usize, j: usize) -> Bits {
    x.with(i, x.get(j)).with(j, x.get(i))
}

pub fn ref_sec_swap(x: Bits, k: usize, i: usize, j: usize) -> Bits {
    let mut y = x;
    for t in 0..k {
        y = ref_swap(y, (i - 1) * k + t, (j - 1) * k + t);
    }
    y
}

pub fn ref_sec_move(x: Bits, k: usize, i: usize, j: usize) -> Bits {
    let sec = |s: usize| x.slice((s - 1) * k, s * k);
    let mut order: Vec<usize> = (1..=x.len() / k).collect();
    let moved = order.remove(i - 1);
    order.insert(j - 1, moved);
    let head = order.iter().fold(Bits::EMPTY, |acc, s| acc.concat(&sec(*s)));
    head.concat(&x.drop_prefix(order.len() * k))
}

pub fn ref_copy(x: Bits, k: usize) -> Bits {
    let mut y = x;
    for t in 0..k {
        y = y.with(t, x.get(t) ^ x.get(k + t));
    }
    y
}

/// The g_OR / g_AND pipelines written as bit operations.
pub fn ref_copy1(x: Bits) -> Bits {
    x.with(0, x.get(0) ^ x.get(1))
}
pub fn ref_cswap(x: Bits) -> Bits {
    if x.get(0) {
        ref_swap(x, 1, 2)
    } else {
        x
    }
}

/// The worked code-controlled recursion example: moves the leading one of a unary prefix.
pub fn code_recursion_example() -> Term {
    parse_term(
        "(cfqrec t=1 r0=1 d=(id) g=(id) \
         h=(compo (not) (named skip 1 (named length_q 1))) p=(hs i) f=(self i))",
    )
    .unwrap()
}
