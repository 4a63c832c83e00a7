//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or demo contract, 2 unreadable or
//! malformed input (including usage errors), 3 evaluation error or a term
//! that cannot be inverted.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use qfc_core::demos::{self, Tally};
use qfc_core::eval::{self, EvalConfig};
use qfc_core::oracle::{self, OracleError};
use qfc_core::schema::{self, Term};
use qfc_core::State;

use crate::format;

/// Success.
pub const EXIT_OK: i32 = 0;
/// A check or demo contract failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Input could not be read or parsed.
pub const EXIT_INPUT: i32 = 2;
/// Evaluation failed, or the term is not invertible.
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qfc", version, about = "Evaluate, check and invert quantum-function terms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a term on a state and write the result.
    Run {
        /// Term file (one s-expression).
        term: PathBuf,
        /// Input state file.
        state: PathBuf,
        /// Output state file (standard output if omitted).
        out: Option<PathBuf>,
    },
    /// Validate a term and check unitarity on inputs of length n.
    Check {
        /// Term file.
        term: PathBuf,
        /// Input length for the matrix check (at most 12).
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Tolerance for ‖M†M − I‖max.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Write the inverse of a measurement-free term.
    Invert {
        /// Term file.
        term: PathBuf,
        /// Output term file (standard output if omitted).
        out: Option<PathBuf>,
    },
    /// Evaluate a term on a state and sample basis outcomes.
    Sample {
        /// Term file.
        term: PathBuf,
        /// Input state file.
        state: PathBuf,
        /// Random seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of shots.
        #[arg(long, default_value_t = 1)]
        shots: usize,
    },
    /// Print the construction-history complexity of a term.
    Complexity {
        /// Term file.
        term: PathBuf,
    },
    /// Run an algorithm's exhaustive contract check.
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// The EPR pair.
    Epr,
    /// BinSearch on every index, string and bit for index length k.
    Binsearch {
        /// Index length (1..=4).
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Divide-and-conquer parity on every string of length n.
    Parity {
        /// Input length (1..=16).
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// The majority test on every string of length 2^k.
    Majority {
        /// Index length (1..=4).
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Promise gap ε ∈ [0, 3/4).
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_term(path: &Path) -> Result<Term, Failure> {
    let text = read_file(path)?;
    schema::parse_term(&text).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_state(path: &Path) -> Result<State, Failure> {
    let text = read_file(path)?;
    format::read_state(&text).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| fail(EXIT_INPUT, format!("standard output: {e}"))),
    }
}

fn io(e: std::io::Error) -> Failure {
    fail(EXIT_INPUT, format!("standard output: {e}"))
}

fn evaluate(term: &Term, phi: &State) -> Result<State, Failure> {
    eval::eval(term, phi, &EvalConfig::default()).map_err(|e| fail(EXIT_RUNTIME, format!("evaluation failed: {e}")))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "qfc: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Run { term, state, out: path } => {
            let t = load_term(&term)?;
            let phi = load_state(&state)?;
            let result = evaluate(&t, &phi)?;
            emit(out, path.as_deref(), &format::write_state(&result))?;
            Ok(EXIT_OK)
        }
        Command::Check { term, n, tol } => check(&load_term(&term)?, n, tol, out),
        Command::Invert { term, out: path } => {
            let t = load_term(&term)?;
            let inv = schema::invert(&t).map_err(|e| fail(EXIT_RUNTIME, e.to_string()))?;
            emit(out, path.as_deref(), &format!("{}\n", schema::render(&inv)))?;
            Ok(EXIT_OK)
        }
        Command::Sample {
            term,
            state,
            seed,
            shots,
        } => {
            let t = load_term(&term)?;
            let phi = load_state(&state)?;
            let result = evaluate(&t, &phi)?;
            let outcomes = eval::sample_shots(&result, seed, shots)
                .map_err(|e| fail(EXIT_RUNTIME, format!("sampling failed: {e}")))?;
            let mut freq = std::collections::BTreeMap::new();
            for b in &outcomes {
                writeln!(out, "{b}").map_err(io)?;
                *freq.entry(*b).or_insert(0usize) += 1;
            }
            writeln!(out, "# outcome count frequency").map_err(io)?;
            for (b, c) in freq {
                writeln!(out, "# {b} {c} {}", c as f64 / shots as f64).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Complexity { term } => {
            let t = load_term(&term)?;
            let c = schema::complexity(&t).map_err(|e| fail(EXIT_RUNTIME, e.to_string()))?;
            writeln!(out, "{c}").map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Demo(d) => demo(d, out),
    }
}

fn check(t: &Term, n: usize, tol: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    if n > oracle::MAX_MATRIX_QUBITS {
        return Err(fail(
            EXIT_INPUT,
            format!("--n {n} exceeds the matrix limit {}", oracle::MAX_MATRIX_QUBITS),
        ));
    }
    let diags = schema::validate(t);
    if diags.is_ok() {
        writeln!(out, "validate: ok").map_err(io)?;
    } else {
        for d in &diags.items {
            writeln!(out, "{d}").map_err(io)?;
        }
        writeln!(out, "validate: {} error(s)", diags.items.len()).map_err(io)?;
        return Ok(EXIT_CHECK_FAILED);
    }
    if !diags.measurement_free {
        writeln!(out, "not measurement-free; unitarity skipped").map_err(io)?;
        return Ok(EXIT_OK);
    }
    let m = match oracle::to_matrix(t, n) {
        Ok(m) => m,
        Err(e @ OracleError::DimensionChanged { .. }) => {
            writeln!(out, "unitarity at n={n}: fail ({e})").map_err(io)?;
            return Ok(EXIT_CHECK_FAILED);
        }
        Err(e) => return Err(fail(EXIT_RUNTIME, e.to_string())),
    };
    let report = oracle::check_unitary(&m, tol);
    writeln!(out, "max deviation: {:e}", report.max_deviation).map_err(io)?;
    let verdict = if report.pass { "pass" } else { "fail" };
    writeln!(out, "unitarity at n={n} (tol {tol:e}): {verdict}").map_err(io)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Tolerance used by the demo contract checks.
const DEMO_TOL: f64 = 1e-9;

fn tally_line(out: &mut dyn Write, label: &str, t: Tally) -> Result<i32, Failure> {
    let verdict = if t.all_passed() { "PASS" } else { "FAIL" };
    writeln!(out, "{label}: {}/{} cases pass  {verdict}", t.passed, t.total).map_err(io)?;
    Ok(if t.all_passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn demo_err(e: demos::DemoError) -> Failure {
    match e {
        demos::DemoError::Range(_) => fail(EXIT_INPUT, e.to_string()),
        _ => fail(EXIT_RUNTIME, e.to_string()),
    }
}

fn demo(d: Demo, out: &mut dyn Write) -> Result<i32, Failure> {
    match d {
        Demo::Epr => {
            let st = evaluate(&demos::epr_term(), &State::ket("00"))?;
            writeln!(out, "term: {}", demos::epr_term()).map_err(io)?;
            out.write_all(format::write_state(&st).as_bytes()).map_err(io)?;
            let errv = st.max_amp_diff(&demos::epr_expected());
            writeln!(out, "max amplitude error: {errv:e}").map_err(io)?;
            let ok = errv <= 1e-12;
            writeln!(out, "{}", if ok { "PASS" } else { "FAIL" }).map_err(io)?;
            Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Demo::Binsearch { k } => {
            let mut failures = Vec::new();
            let t = demos::bin_search_cases(k, DEMO_TOL, |c| {
                if c.error > DEMO_TOL {
                    failures.push(format!("  m={} b={} s={} error={:e}", c.m, c.b as u8, c.s, c.error));
                }
            })
            .map_err(demo_err)?;
            for f in &failures {
                writeln!(out, "{f}").map_err(io)?;
            }
            tally_line(out, &format!("binsearch k={k}"), t)
        }
        Demo::Parity { n } => {
            let t = demos::parity_cases_in(n..=n, DEMO_TOL).map_err(demo_err)?;
            tally_line(out, &format!("parity n={n}"), t)
        }
        Demo::Majority { k, eps } => {
            let rows = demos::majority_rows(k, eps).map_err(demo_err)?;
            writeln!(out, "{:<w$}  #0  #1  p0        p1        promise  ok", "x", w = 1 << k).map_err(io)?;
            let mut tally = Tally::default();
            for r in &rows {
                let ok = r.meets_bound(DEMO_TOL) && r.meets_promise(eps, DEMO_TOL);
                tally.total += 1;
                tally.passed += ok as usize;
                let promise = match r.promise {
                    Some(b) => format!("b={}", b as u8),
                    None => "-".to_string(),
                };
                writeln!(
                    out,
                    "{}  {:>2}  {:>2}  {:<8.6}  {:<8.6}  {:<7}  {}",
                    r.x,
                    r.counts.0,
                    r.counts.1,
                    r.p[0],
                    r.p[1],
                    promise,
                    if ok { "yes" } else { "NO" }
                )
                .map_err(io)?;
            }
            tally_line(out, &format!("majority k={k} eps={eps}"), tally)
        }
    }
}
