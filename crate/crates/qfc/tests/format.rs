use proptest::prelude::*;
use qfc::format::{read_state, write_state};
use qfc_core::{Amp, Bits, State};

#[test]
fn writes_the_documented_layout() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let st = State::from_amplitudes(
        2,
        vec![
            (Bits::new(2, 0), Amp::new(h, 0.0)),
            (Bits::new(2, 3), Amp::new(h, -0.0)),
        ],
    );
    assert_eq!(
        write_state(&st),
        "length 2\n00 0.7071067811865476 0\n11 0.7071067811865476 0\n"
    );
    assert_eq!(write_state(&State::null()), "null\n");
    assert_eq!(write_state(&State::basis(Bits::EMPTY)), "length 0\nλ 1 0\n");
}

#[test]
fn reads_comments_empty_strings_and_null() {
    let st = read_state("# a comment\n\nlength 1  # trailing\n1 0 -1\n").unwrap();
    assert_eq!(
        st,
        State::from_amplitudes(1, vec![(Bits::new(1, 1), Amp::new(0.0, -1.0))])
    );
    assert_eq!(read_state("length 0\n- 1 0\n").unwrap(), State::basis(Bits::EMPTY));
    assert_eq!(read_state("length 0\nλ 1 0\n").unwrap(), State::basis(Bits::EMPTY));
    assert!(read_state("null\n").unwrap().is_null());
    // A length with no amplitude lines is the zero vector of that length.
    assert_eq!(read_state("length 3\n").unwrap().len(), 3);
}

#[test]
fn rejects_malformed_input() {
    let cases = [
        ("", 0),
        ("lengthy 2\n", 1),
        ("length x\n", 1),
        ("length 2\n0 1 0\n", 2),
        ("length 1\n0 1 0\n0 0 1\n", 3),
        ("length 1\n0 1\n", 2),
        ("length 1\n0 NaN 0\n", 2),
        ("length 1\n0 inf 0\n", 2),
        ("length 1\n2 1 0\n", 2),
        ("null\n0 1 0\n", 2),
    ];
    for (text, line) in cases {
        let e = read_state(text).expect_err(text);
        assert_eq!(e.line, line, "{text:?}: {e}");
    }
}

fn arb_state() -> impl Strategy<Value = State> {
    (0usize..=8).prop_flat_map(|n| {
        let max = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        proptest::collection::btree_map(0..=max, (any::<f64>(), any::<f64>()), 0..12).prop_map(move |m| {
            let items: Vec<(Bits, Amp)> = m
                .into_iter()
                .filter(|(_, (re, im))| re.is_finite() && im.is_finite())
                .map(|(v, (re, im))| (Bits::new(n, v as u128), Amp::new(re, im)))
                .collect();
            State::from_amplitudes(n, items)
        })
    })
}

proptest! {
    #[test]
    fn write_then_read_is_bit_exact(st in arb_state()) {
        let back = read_state(&write_state(&st)).unwrap();
        prop_assert_eq!(back.len(), st.len());
        for (b, a) in st.iter() {
            let got = back.amplitude(&b);
            prop_assert_eq!((got.re + 0.0).to_bits(), (a.re + 0.0).to_bits());
            prop_assert_eq!((got.im + 0.0).to_bits(), (a.im + 0.0).to_bits());
        }
        prop_assert_eq!(write_state(&back), write_state(&st));
    }
}
