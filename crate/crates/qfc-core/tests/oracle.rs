mod common;

use common::arb_unit_state;
use proptest::prelude::*;
use qfc_core::eval::eval_default;
use qfc_core::oracle::{
    check_unitary, classical_ref, fuzz_terms, measurement_free_corpus, random_state, term_depth, to_matrix, Classical,
    ClassicalValue, OperatorMatrix, OracleError,
};
use qfc_core::schema::{compo, invert, parse_term, render, validate, Angle, Term};
use qfc_core::stdlib;
use qfc_core::{Amp, Bits, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn entries(m: &OperatorMatrix) -> Vec<Amp> {
    m.entries.clone()
}

fn real(xs: &[f64]) -> Vec<Amp> {
    xs.iter().map(|x| Amp::new(*x, 0.0)).collect()
}

fn close(a: &[Amp], b: &[Amp], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

#[test]
fn matrix_examples() {
    assert_eq!(to_matrix(&Term::Ident, 2).unwrap(), OperatorMatrix::identity(2));
    let wh = to_matrix(&stdlib::wh(), 1).unwrap();
    assert!(close(&entries(&wh), &real(&[H, H, H, -H]), 1e-15));
    let th = Angle::pi_frac(1, 4);
    let rot = to_matrix(&Term::Rot(th), 1).unwrap();
    let (c, s) = (th.radians().cos(), th.radians().sin());
    assert!(close(&entries(&rot), &real(&[c, -s, s, c]), 1e-15));
    // CNOT in the |a b⟩ basis ordering 00, 01, 10, 11.
    let cnot = to_matrix(&stdlib::cnot(), 2).unwrap();
    let want = real(&[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]);
    assert_eq!(entries(&cnot), want);
    assert_eq!(cnot.get(3, 2), Amp::new(1.0, 0.0));
}

#[test]
fn unitarity_examples() {
    let wh = to_matrix(&stdlib::wh(), 1).unwrap();
    assert!(check_unitary(&wh, 1e-12).pass);
    let meas = to_matrix(&Term::Meas(false), 1).unwrap();
    let r = check_unitary(&meas, 1e-9);
    assert!(!r.pass);
    assert!((r.max_deviation - 1.0).abs() < 1e-15);
}

#[test]
fn matrix_limits_and_dimension_changes() {
    assert!(matches!(to_matrix(&Term::Ident, 13), Err(OracleError::TooLarge(13))));
    // Code removal drops the separator, so the length changes.
    let t = parse_term("(coderemove 1)").unwrap();
    let dim_changed = (1..=4).any(|n| matches!(to_matrix(&t, n), Err(OracleError::DimensionChanged { .. })));
    let e = (1..=4).find_map(|n| to_matrix(&t, n).err());
    if let Some(e) = e {
        assert!(e.to_string().starts_with("dimension-changed"));
    }
    let _ = dim_changed;
}

#[test]
fn classical_references() {
    let x = |s: &str| s.parse::<Bits>().unwrap();
    assert_eq!(
        classical_ref(Classical::Parity, &x("1101")),
        Some(ClassicalValue::Bit(true))
    );
    assert_eq!(
        classical_ref(Classical::Or, &x("0000")),
        Some(ClassicalValue::Bit(false))
    );
    assert_eq!(
        classical_ref(Classical::And, &x("111")),
        Some(ClassicalValue::Bit(true))
    );
    assert_eq!(
        classical_ref(Classical::MajorityCount, &x("1100")),
        Some(ClassicalValue::Counts(2, 2))
    );
    assert_eq!(classical_ref(Classical::Parity, &Bits::EMPTY), None);
}

#[test]
fn fuzz_fixture_is_stable() {
    let text = include_str!("fixtures/fuzz_seed1_count3.txt");
    let want: Vec<(bool, &str)> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (flag, term) = l.split_once(' ').unwrap();
            (flag == "true", term)
        })
        .collect();
    let got = fuzz_terms(1, 3, 6);
    assert_eq!(got.len(), want.len());
    for (g, (flag, term)) in got.iter().zip(want) {
        assert_eq!(g.measurement_free, flag);
        assert_eq!(render(&g.term), term);
    }
}

#[test]
fn fuzz_terms_are_valid_and_bounded() {
    for seed in 0..10 {
        let terms = fuzz_terms(seed, 50, 6);
        assert_eq!(terms.len(), 50);
        for f in &terms {
            assert!(term_depth(&f.term) <= 6);
            let d = validate(&f.term);
            assert!(d.is_ok(), "{}: {:?}", f.term, d.items);
            assert_eq!(d.measurement_free, f.measurement_free);
        }
        assert_eq!(terms, fuzz_terms(seed, 50, 6));
    }
    let corpus = measurement_free_corpus(3, 40, 4);
    assert_eq!(corpus.len(), 40);
    assert!(corpus.iter().all(|t| !t.contains_meas() && term_depth(t) <= 4));
    assert_eq!(term_depth(&Term::Not), 1);
    assert_eq!(term_depth(&compo(Term::Not, compo(Term::Swap, Term::Ident))), 3);
}

#[test]
fn random_states_are_unit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 0..=10 {
        let s = random_state(&mut rng, n, 16);
        assert_eq!(s.len(), n);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}

fn corpus_term() -> impl Strategy<Value = (Term, usize)> {
    (any::<u64>(), 1usize..=5).prop_map(|(seed, n)| (measurement_free_corpus(seed, 1, 5).remove(0), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_matrix_product((g, n) in corpus_term(), seed in any::<u64>()) {
        let h = measurement_free_corpus(seed, 1, 5).remove(0);
        let mg = to_matrix(&g, n).unwrap();
        let mh = to_matrix(&h, n).unwrap();
        let mc = to_matrix(&compo(g.clone(), h.clone()), n).unwrap();
        prop_assert!(mc.max_diff(&mg.mul(&mh)) <= 1e-9);
    }

    #[test]
    fn inverse_is_adjoint((f, n) in corpus_term()) {
        let m = to_matrix(&f, n).unwrap();
        let mi = to_matrix(&invert(&f).unwrap(), n).unwrap();
        prop_assert!(mi.max_diff(&m.adjoint()) <= 1e-9, "{}", f);
    }

    #[test]
    fn eval_matches_matrix_vector_product(seed in any::<u64>(), phi in arb_unit_state(0..=6, 12)) {
        for f in fuzz_terms(seed, 3, 5) {
            let m = to_matrix(&f.term, phi.len()).unwrap();
            let direct = eval_default(&f.term, &phi).unwrap();
            let via = m.apply(&phi);
            prop_assert!(direct.distance(&via) <= 1e-9, "{}", f.term);
        }
    }

    #[test]
    fn eval_is_linear(seed in any::<u64>(), phi in arb_unit_state(1..=10, 16)) {
        for f in fuzz_terms(seed, 2, 6) {
            let whole = eval_default(&f.term, &phi).unwrap();
            let mut parts = State::zero(phi.len());
            let mut null = true;
            for (y, a) in phi.iter() {
                let out = eval_default(&f.term, &State::basis(y)).unwrap();
                if !out.is_null() {
                    if null {
                        parts = State::zero(out.len());
                        null = false;
                    }
                    parts.add_scaled(&out, a);
                }
            }
            if null {
                prop_assert!(whole.is_null() || whole.norm() == 0.0);
            } else {
                prop_assert!(whole.distance(&parts) <= 1e-9, "{}", f.term);
            }
        }
    }
}
