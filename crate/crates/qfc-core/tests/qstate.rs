mod common;

use common::{arb_state, arb_unit_state, b};
use proptest::prelude::*;
use qfc_core::qstate::{bra_reduce, half_lengths, half_swap, ilog, inner, norm, tensor, Kind};
use qfc_core::{Amp, Bits, State};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn epr() -> State {
    State::from_amplitudes(2, [(b("00"), Amp::new(H, 0.0)), (b("11"), Amp::new(H, 0.0))])
}

#[test]
fn bits_basics() {
    let x = b("0110");
    assert_eq!(x.len(), 4);
    assert_eq!(x.value(), 0b0110);
    assert!(!x.get(0) && x.get(1) && x.get(2) && !x.get(3));
    assert_eq!(x.to_bit_string(), "0110");
    assert_eq!(x.concat(&b("1")), b("01101"));
    assert_eq!(x.split_at(1), (b("0"), b("110")));
    assert_eq!(x.swap_bits(0, 3), b("0110"));
    assert_eq!(x.swap_bits(0, 1), b("1010"));
    assert_eq!(Bits::EMPTY.to_string(), "λ");
    assert_eq!("λ".parse::<Bits>().unwrap(), Bits::EMPTY);
    assert!("012".parse::<Bits>().is_err());
    // Shortlex order: λ, 0, 1, 00, …
    let mut v = vec![b("00"), b("1"), Bits::EMPTY, b("0")];
    v.sort();
    assert_eq!(v, vec![Bits::EMPTY, b("0"), b("1"), b("00")]);
}

#[test]
fn tensor_examples() {
    assert!(tensor(&State::scalar(Amp::new(0.0, 0.0)), &epr()).is_null());
    assert!(tensor(&epr(), &State::scalar(Amp::new(0.0, 0.0))).is_null());
    assert_eq!(tensor(&State::ket("01"), &State::ket("1")), State::ket("011"));
    assert!(tensor(&State::null(), &epr()).is_null());
    assert!(tensor(&epr(), &State::null()).is_null());
    let scaled = tensor(&State::scalar(Amp::new(2.0, 0.0)), &State::ket("1"));
    assert_eq!(scaled.amplitude(&b("1")), Amp::new(2.0, 0.0));
}

#[test]
fn bra_reduce_examples() {
    let r = bra_reduce(&b("0"), &epr());
    assert_eq!(r.len(), 1);
    assert!((r.amplitude(&b("0")) - Amp::new(H, 0.0)).norm() < 1e-15);
    assert_eq!(r.amplitude(&b("1")), Amp::new(0.0, 0.0));
    assert_eq!(
        bra_reduce(&b("01"), &State::ket("01")).as_scalar(),
        Some(Amp::new(1.0, 0.0))
    );
    assert!(bra_reduce(&b("010"), &State::ket("01")).is_null());
    assert!(bra_reduce(&b("0"), &State::null()).is_null());
}

#[test]
fn inner_examples() {
    let plus = State::from_amplitudes(1, [(b("0"), Amp::new(H, 0.0)), (b("1"), Amp::new(H, 0.0))]);
    let s = inner(&plus, &plus).as_scalar().unwrap();
    assert!((s - Amp::new(1.0, 0.0)).norm() < 1e-15);
    let r = inner(&State::ket("0"), &epr());
    assert!(r.distance(&State::ket("0").scaled(Amp::new(H, 0.0))) < 1e-15);
    assert!(inner(&plus, &State::null()).is_null());
    // Conjugate-linear in the first argument.
    let i_ket = State::ket("0").scaled(Amp::new(0.0, 1.0));
    assert_eq!(inner(&i_ket, &State::ket("0")).as_scalar(), Some(Amp::new(0.0, -1.0)));
}

#[test]
fn norm_examples() {
    assert!((norm(&epr()) - 1.0).abs() < 1e-15);
    assert_eq!(norm(&State::null()), 0.0);
    assert!((norm(&State::ket("0").scaled(Amp::new(0.6, 0.0))) - 0.6).abs() < 1e-15);
    assert_eq!(norm(&State::scalar(Amp::new(0.0, -2.0))), 2.0);
    assert_eq!(State::null().kind(), Kind::Null);
}

#[test]
fn half_lengths_examples() {
    let h = half_lengths(3);
    assert_eq!((h.lh, h.rh, h.ilog), (2, 1, 2));
    let h = half_lengths(0);
    assert_eq!((h.lh, h.rh, h.ilog), (0, 0, 0));
    assert_eq!(half_lengths(half_lengths(4).lh).lh, 1);
    assert_eq!(ilog(1), 0);
    for k in 0..20 {
        assert_eq!(ilog(1 << k), k);
    }
    assert_eq!(ilog(5), 3);
}

#[test]
fn half_swap_examples() {
    let phi = State::ket("001").scaled(Amp::new(0.5, 0.25));
    assert_eq!(half_swap(&phi, false), State::ket("100").scaled(Amp::new(0.5, 0.25)));
    let one = State::from_amplitudes(1, [(b("0"), Amp::new(0.6, 0.0)), (b("1"), Amp::new(0.0, 0.8))]);
    assert_eq!(half_swap(&one, false), one);
    assert!(half_swap(&State::null(), false).is_null());
    let x = State::ket("110100");
    assert_eq!(half_swap(&x, false), State::ket("100110"));
    assert_eq!(half_swap(&half_swap(&x, false), false), x);
}

/// Reference half swap: move the first `split` bits to the back.
fn rotate_ref(x: Bits, split: usize) -> Bits {
    let (a, rest) = x.split_at(split);
    rest.concat(&a)
}

proptest! {
    #[test]
    fn tensor_is_associative(a in arb_state(0..=3, 4), b_ in arb_state(0..=3, 4), c in arb_state(0..=4, 4)) {
        let l = tensor(&tensor(&a, &b_), &c);
        let r = tensor(&a, &tensor(&b_, &c));
        prop_assert!(l.max_amp_diff(&r) <= 1e-12);
    }

    #[test]
    fn tensor_adds_lengths(a in arb_unit_state(0..=5, 4), b_ in arb_unit_state(0..=5, 4)) {
        let t = tensor(&a, &b_);
        prop_assert_eq!(t.len(), a.len() + b_.len());
        prop_assert!((t.norm() - a.norm() * b_.norm()).abs() < 1e-12);
    }

    #[test]
    fn bra_reduce_inverts_tensor(u in (0usize..=4).prop_flat_map(|n| (Just(n), 0u128..(1u128 << n))),
                                 phi in arb_state(0..=5, 6)) {
        let u = Bits::new(u.0, u.1);
        let r = bra_reduce(&u, &tensor(&State::basis(u), &phi));
        prop_assert_eq!(r.len(), phi.len());
        prop_assert_eq!(r, phi);
    }

    #[test]
    fn bra_reduce_length(phi in arb_state(1..=6, 6), k in 0usize..=6) {
        let k = k.min(phi.len());
        let u = Bits::zeros(k);
        prop_assert_eq!(bra_reduce(&u, &phi).len(), phi.len() - k);
    }

    #[test]
    fn half_swap_properties(phi in arb_unit_state(0..=9, 8)) {
        let n = phi.len();
        let fwd = half_swap(&phi, false);
        prop_assert_eq!(fwd.len(), n);
        prop_assert!((fwd.norm() - 1.0).abs() < 1e-12);
        prop_assert_eq!(half_swap(&fwd, true), phi.clone());
        if n % 2 == 0 {
            prop_assert_eq!(half_swap(&fwd, false), phi.clone());
        }
        if n >= 2 {
            let lh = half_lengths(n).lh;
            for (x, a) in phi.iter() {
                prop_assert_eq!(fwd.amplitude(&rotate_ref(x, lh)), a);
            }
        }
    }

    #[test]
    fn norm_is_root_sum_of_squares(phi in arb_state(0..=8, 10)) {
        let direct: f64 = phi.iter().map(|(_, a)| a.re * a.re + a.im * a.im).sum();
        prop_assert!((norm(&phi) * norm(&phi) - direct).abs() < 1e-12);
    }

    #[test]
    fn dense_round_trip(phi in arb_state(0..=6, 8)) {
        prop_assert_eq!(State::from_dense(phi.len(), &phi.to_dense()), phi);
    }
}
