mod common;

use common::b;
use proptest::prelude::*;
use qfc_core::codec::{
    bin, bin_index, bin_k, hat, hat_decode, hat_encode, is_section_free, non_set, parse_code, tilde_decode,
    tilde_encode, CodecError, Symbol,
};
use qfc_core::qstate::tensor;
use qfc_core::{Amp, Bits, State};

#[test]
fn symbol_table() {
    let table = [
        (Symbol::Zero, "000"),
        (Symbol::One, "001"),
        (Symbol::Blank, "010"),
        (Symbol::End, "011"),
        (Symbol::Two, "111"),
        (Symbol::Head, "100"),
        (Symbol::Sep, "110"),
        (Symbol::Time, "101"),
    ];
    for (s, code) in table {
        assert_eq!(hat_encode(s), b(code), "{s}");
        assert_eq!(hat_decode(&b(code)), Ok(s));
    }
    assert_eq!(hat_decode(&b("011")), Ok(Symbol::End));
    assert!(matches!(hat_decode(&b("01")), Err(CodecError::UnknownCode(_))));
    // The table is a bijection onto {0,1}^3.
    let mut codes: Vec<Bits> = Symbol::ALL.iter().map(|s| hat(*s)).collect();
    codes.sort();
    codes.dedup();
    assert_eq!(codes.len(), 8);
}

#[test]
fn tilde_examples() {
    assert_eq!(bin(8), b("001"));
    assert_eq!(tilde_encode(&bin(8), false), b("000000001011"));
    assert_eq!(tilde_encode(&bin_k(3, 2).unwrap(), false), b("000000001011"));
    assert_eq!(tilde_encode(&Bits::EMPTY, false), b("011"));
    assert_eq!(tilde_encode(&b("10"), true), b("001000"));
    assert_eq!(tilde_decode(&b("000000001011")), Some(b("001")));
    assert_eq!(tilde_decode(&b("011")), Some(Bits::EMPTY));
    assert_eq!(tilde_decode(&b("000")), None);
    assert_eq!(tilde_decode(&b("011000")), None);
    assert_eq!(tilde_decode(&b("111011")), None);
}

#[test]
fn bin_examples() {
    assert_eq!(bin(0), Bits::EMPTY);
    assert_eq!(bin(1), b("0"));
    assert_eq!(bin(2), b("1"));
    assert_eq!(bin(3), b("00"));
    assert_eq!(bin_k(3, 4), Ok(b("011")));
    assert_eq!(bin_k(3, 0), Err(CodecError::UndefinedIndex { k: 3, n: 0 }));
    assert_eq!(bin_k(2, 5), Err(CodecError::UndefinedIndex { k: 2, n: 5 }));
}

#[test]
fn bin_is_shortlex_enumeration() {
    // Independent enumeration: list all strings by length, then value.
    let mut n = 0u128;
    for len in 0..=10 {
        for v in 0..(1u128 << len) {
            assert_eq!(bin(n), Bits::new(len, v));
            assert_eq!(bin_index(&Bits::new(len, v)), n);
            n += 1;
        }
    }
}

#[test]
fn bin_k_is_order_preserving_bijection() {
    for k in 1..=10 {
        let all: Vec<Bits> = (1..=(1u128 << k)).map(|m| bin_k(k, m).unwrap()).collect();
        assert!(all.windows(2).all(|w| w[0].to_bit_string() < w[1].to_bit_string()));
        assert_eq!(all.len(), 1 << k);
        assert!(all.iter().all(|x| x.len() == k));
    }
}

#[test]
fn tilde_round_trip_exhaustive() {
    let mut seen = std::collections::BTreeSet::new();
    for len in 0..=12 {
        for v in 0..(1u128 << len) {
            let s = Bits::new(len, v);
            let code = tilde_encode(&s, false);
            assert_eq!(code.len(), 3 * len + 3);
            assert_eq!(tilde_decode(&code), Some(s));
            assert!(seen.insert(code), "collision at {s}");
        }
    }
}

#[test]
fn parse_code_examples() {
    let r0 = b("11");
    let (x1, x2, x3) = (b("01"), b("00"), b("10"));
    let y = x1.concat(&x2).concat(&x3).concat(&r0).concat(&b("1011"));
    let v = parse_code(&y, &r0).unwrap();
    assert_eq!(v.x, b("010010"));
    assert_eq!(v.data, b("1011"));
    assert_eq!(v.code(), b("01001011"));
    let y = x1.concat(&x2).concat(&r0).concat(&x3).concat(&r0);
    assert_eq!(parse_code(&y, &r0).unwrap().x, b("0100"));
    assert_eq!(parse_code(&b("010010"), &r0), None);
    // Separators are only recognised on aligned sections.
    assert_eq!(parse_code(&b("0110"), &r0), None);
    assert_eq!(parse_code(&b("011"), &r0), None);
    assert!(is_section_free(&b("0100"), &r0));
    assert!(!is_section_free(&b("0111"), &r0));
    assert!(!is_section_free(&b("010"), &r0));
}

#[test]
fn non_set_examples() {
    let r0 = b("11");
    let a = Amp::new(0.6, 0.0);
    let c = Amp::new(0.0, 0.8);
    let phi = State::from_amplitudes(6, [(b("001101"), a), (b("100011"), c)]);
    let got: Vec<Bits> = non_set(&phi, &r0).into_iter().collect();
    assert_eq!(got, vec![b("00"), b("1000")]);
    let only_sep = tensor(&State::basis(r0), &State::ket("0101"));
    assert_eq!(
        non_set(&only_sep, &r0).into_iter().collect::<Vec<_>>(),
        vec![Bits::EMPTY]
    );
    assert!(non_set(&State::ket("0100"), &r0).is_empty());
}

proptest! {
    #[test]
    fn parse_code_is_minimal_decomposition(w in 1usize..=3, r in 0u128..8, n in 0usize..=12, y in any::<u128>()) {
        let r0 = Bits::new(w, r & ((1 << w) - 1));
        let y = Bits::new(n, if n == 0 { 0 } else { y >> (128 - n) });
        match parse_code(&y, &r0) {
            Some(v) => {
                prop_assert_eq!(v.x.concat(&r0).concat(&v.data), y);
                prop_assert!(is_section_free(&v.x, &r0));
            }
            None => {
                // No aligned section equals r0.
                for i in 0..n / w {
                    prop_assert_ne!(y.slice(i * w, i * w + w), r0);
                }
            }
        }
    }

    #[test]
    fn tilde_codes_parse_before_two(len in 0usize..=10, v in any::<u128>(), dl in 0usize..=9, d in any::<u128>()) {
        let s = Bits::new(len, if len == 0 { 0 } else { v >> (128 - len) });
        let data = Bits::new(dl, if dl == 0 { 0 } else { d >> (128 - dl) });
        let y = tilde_encode(&s, false).concat(&hat(Symbol::Two)).concat(&data);
        let parsed = parse_code(&y, &hat(Symbol::Two)).unwrap();
        prop_assert_eq!(parsed.x, tilde_encode(&s, false));
        prop_assert_eq!(parsed.data, data);
    }
}
