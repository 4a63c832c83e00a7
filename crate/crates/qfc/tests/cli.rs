use std::path::{Path, PathBuf};
use std::process::Command;

use qfc::cli::{run, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_OK, EXIT_RUNTIME};
use qfc::format::{read_state, write_state};
use qfc_core::eval::eval_default;
use qfc_core::oracle::fuzz_terms;
use qfc_core::schema::render;
use qfc_core::State;
use tempfile::TempDir;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qfc(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qfc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_phase_pi_on_one() {
    let d = TempDir::new().unwrap();
    let t = file(&d, "t.qf", "(phase pi)");
    let st = file(&d, "s.txt", "length 1\n1 1 0\n");
    let o = qfc(&["run", s(&t), s(&st)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout, "length 1\n1 -1 0\n");
}

#[test]
fn run_epr_writes_output_file() {
    let d = TempDir::new().unwrap();
    let t = file(&d, "epr.qf", "(compo (branch (id) (not)) (rot pi/4))");
    let st = file(&d, "s.txt", "length 2\n00 1 0\n");
    let out = d.path().join("out.txt");
    let o = qfc(&["run", s(&t), s(&st), s(&out)]);
    assert_eq!(o.code, EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, "length 2\n00 0.7071067811865476 0\n11 0.7071067811865476 0\n");
}

#[test]
fn run_output_equals_in_process_eval() {
    let d = TempDir::new().unwrap();
    let phi = State::from_amplitudes(
        4,
        (0..16u128).map(|v| (qfc_core::Bits::new(4, v), qfc_core::Amp::new(0.25, 0.0))),
    );
    let st = file(&d, "s.txt", &write_state(&phi));
    for f in fuzz_terms(11, 10, 5) {
        let t = file(&d, "t.qf", &render(&f.term));
        let o = qfc(&["run", s(&t), s(&st)]);
        let want = eval_default(&f.term, &phi);
        match want {
            Ok(w) => {
                assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
                assert_eq!(o.stdout, write_state(&w));
                assert_eq!(read_state(&o.stdout).unwrap(), w);
            }
            Err(_) => assert_eq!(o.code, EXIT_RUNTIME),
        }
    }
}

#[test]
fn input_errors_exit_2_with_diagnostic() {
    let d = TempDir::new().unwrap();
    let bad = file(&d, "bad.qf", "(compo (not)");
    let st = file(&d, "s.txt", "length 1\n0 1 0\n");
    let o = qfc(&["run", s(&bad), s(&st)]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stdout.is_empty());
    assert!(
        o.stderr.starts_with("qfc: ") && o.stderr.contains("bad.qf"),
        "{}",
        o.stderr
    );

    let t = file(&d, "t.qf", "(not)");
    let badst = file(&d, "bad.txt", "length 1\n01 1 0\n");
    assert_eq!(qfc(&["run", s(&t), s(&badst)]).code, EXIT_INPUT);
    let missing = d.path().join("missing.qf");
    assert_eq!(qfc(&["run", s(&missing), s(&st)]).code, EXIT_INPUT);
    assert_eq!(qfc(&["frobnicate"]).code, EXIT_INPUT);
    assert_eq!(qfc(&["check", s(&t), "--n", "13"]).code, EXIT_INPUT);
    assert_eq!(qfc(&["demo", "binsearch", "--k", "5"]).code, EXIT_INPUT);
    assert_eq!(qfc(&["--help"]).code, EXIT_OK);
}

#[test]
fn check_reports() {
    let d = TempDir::new().unwrap();
    let wh = file(&d, "wh.qf", "(named wh)");
    let o = qfc(&["check", s(&wh), "--n", "1", "--tol", "1e-9"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("validate: ok"));
    assert!(o.stdout.contains("max deviation: "));
    assert!(o.stdout.contains("unitarity at n=1 (tol 1e-9): pass"), "{}", o.stdout);

    let m = file(&d, "m.qf", "(meas 0)");
    let o = qfc(&["check", s(&m)]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("not measurement-free; unitarity skipped"));

    let fixture = &fuzz_terms(1, 1, 6)[0];
    let f = file(&d, "f.qf", &render(&fixture.term));
    let o = qfc(&["check", s(&f), "--n", "4"]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("max deviation: ") && o.stdout.contains(": pass"));
}

#[test]
fn check_flags_invalid_terms() {
    use qfc_core::schema::Term;
    let d = TempDir::new().unwrap();
    let stray = Term::CodeSkipPlus("1".parse().unwrap(), Box::new(Term::Ident), Box::new(Term::Not));
    let t = file(&d, "t.qf", &render(&stray));
    let o = qfc(&["check", s(&t)]);
    assert_eq!(o.code, EXIT_CHECK_FAILED, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("codeskip-placement"), "{}", o.stdout);
    assert!(o.stdout.contains("validate: 1 error(s)"));
}

#[test]
fn invert_and_complexity() {
    let d = TempDir::new().unwrap();
    let t = file(&d, "t.qf", "(phase pi/3)");
    let o = qfc(&["invert", s(&t)]);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(o.stdout.trim(), "(phase -pi/3)");
    let out = d.path().join("inv.qf");
    assert_eq!(qfc(&["invert", s(&t), s(&out)]).code, EXIT_OK);
    assert_eq!(std::fs::read_to_string(&out).unwrap().trim(), "(phase -pi/3)");

    let m = file(&d, "m.qf", "(compo (meas 0) (not))");
    assert_eq!(qfc(&["invert", s(&m)]).code, EXIT_RUNTIME);

    let c = file(&d, "c.qf", "(compo (not) (not))");
    let o = qfc(&["complexity", s(&c)]);
    assert_eq!((o.code, o.stdout.trim()), (EXIT_OK, "3"));
    let c = file(&d, "cnot.qf", "(named cnot)");
    assert_eq!(qfc(&["complexity", s(&c)]).stdout.trim(), "3");
}

#[test]
fn sample_is_deterministic() {
    let d = TempDir::new().unwrap();
    let t = file(&d, "epr.qf", "(compo (branch (id) (not)) (rot pi/4))");
    let st = file(&d, "s.txt", "length 2\n00 1 0\n");
    let o = qfc(&["sample", s(&t), s(&st), "--seed", "7", "--shots", "1"]);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(o.stdout.lines().next(), Some("00"));
    let a = qfc(&["sample", s(&t), s(&st), "--seed", "3", "--shots", "200"]);
    let b = qfc(&["sample", s(&t), s(&st), "--seed", "3", "--shots", "200"]);
    assert_eq!(a.stdout, b.stdout);
    let outcomes: Vec<&str> = a.stdout.lines().take(200).collect();
    assert!(outcomes.iter().all(|l| *l == "00" || *l == "11"));
    assert!(a.stdout.contains("# outcome count frequency"));
}

#[test]
fn demos() {
    let o = qfc(&["demo", "epr"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.trim_end().ends_with("PASS"));
    let o = qfc(&["demo", "binsearch", "--k", "2"]);
    assert_eq!(
        (o.code, o.stdout.trim()),
        (EXIT_OK, "binsearch k=2: 128/128 cases pass  PASS")
    );
    let o = qfc(&["demo", "parity", "--n", "8"]);
    assert_eq!(
        (o.code, o.stdout.trim()),
        (EXIT_OK, "parity n=8: 256/256 cases pass  PASS")
    );
    let o = qfc(&["demo", "majority", "--k", "2", "--eps", "0.5"]);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(o.stdout.lines().count(), 1 + 16 + 1);
    assert!(
        o.stdout.contains("1111   0   4  0.000000  1.000000  b=1      yes"),
        "{}",
        o.stdout
    );
    assert!(o.stdout.trim_end().ends_with("16/16 cases pass  PASS"));
}

#[test]
fn binary_entry_point() {
    let d = TempDir::new().unwrap();
    let t = file(&d, "t.qf", "(phase pi)");
    let st = file(&d, "s.txt", "length 1\n1 1 0\n");
    let out = Command::new(env!("CARGO_BIN_EXE_qfc"))
        .args(["run", s(&t), s(&st)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "length 1\n1 -1 0\n");
    let bad = file(&d, "bad.qf", "(");
    let out = Command::new(env!("CARGO_BIN_EXE_qfc"))
        .args(["run", s(&bad), s(&st)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}
