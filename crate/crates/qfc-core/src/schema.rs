//! The term language: construction histories as an abstract syntax tree,
//! their concrete s-expression syntax, well-formedness validation, the
//! descriptive complexity measure and structural inversion.
//!
//! Concrete syntax (one s-expression per file, `#` starts a line comment):
//!
//! ```text
//! (id) (not) (swap) (phase pi/3) (rot 0.25) (meas 0)
//! (compo g h ...)                  ; n-ary, nests to the right; h applied first
//! (branch g h)
//! (cfqrec t=1 r0=111 d=(id) g=(id) h=(id) p=(i hs ...) f=(self i ...) [bound=none])
//! (lcompo 11 g) (codeskip+ r0 g h) (codeskip- r0 g h)
//! (coderemove 1) (coderep 1) (codectl r0 f)
//! (halfd g h) (midapp k h) (divconq k=1 g=... h=... p=... f1=self f2=self)
//! (named <builder> <params...>)
//! ```

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::qstate::Bits;
use crate::stdlib::{BuildError, Builder};

/// Largest separator width accepted (the p/f tables have 2^|r0| entries).
pub const MAX_R0_LEN: usize = 12;

// ---------------------------------------------------------------------------
// Angles
// ---------------------------------------------------------------------------

/// A rotation or phase angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// `π · num / den`, kept in lowest terms with `den > 0`.
    PiFrac(i64, u64),
    /// A plain decimal number of radians.
    Decimal(f64),
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Angle {
    /// `π · num / den` in lowest terms.
    ///
    /// # Panics
    /// Panics if `den == 0`.
    pub fn pi_frac(num: i64, den: u64) -> Angle {
        assert!(den > 0, "zero denominator");
        if num == 0 {
            return Angle::PiFrac(0, 1);
        }
        let g = gcd(num.unsigned_abs(), den);
        Angle::PiFrac(num / g as i64, den / g)
    }

    /// The angle π.
    pub fn pi() -> Angle {
        Angle::PiFrac(1, 1)
    }

    /// The value in radians.
    pub fn radians(&self) -> f64 {
        match *self {
            Angle::PiFrac(n, d) => PI * n as f64 / d as f64,
            Angle::Decimal(x) => x,
        }
    }

    /// `(cos θ, sin θ)`, exact for multiples of π/4.
    pub fn cos_sin(&self) -> (f64, f64) {
        if let Angle::PiFrac(n, d) = *self {
            if 4 % d == 0 {
                // θ = (π/4)·q with q taken modulo 8.
                let q = (n * (4 / d) as i64).rem_euclid(8);
                let h = core::f64::consts::FRAC_1_SQRT_2;
                return [
                    (1.0, 0.0),
                    (h, h),
                    (0.0, 1.0),
                    (-h, h),
                    (-1.0, 0.0),
                    (-h, -h),
                    (0.0, -1.0),
                    (h, -h),
                ][q as usize];
            }
        }
        let th = self.radians();
        (libm::cos(th), libm::sin(th))
    }

    /// The negated angle.
    pub fn neg(&self) -> Angle {
        match *self {
            Angle::PiFrac(n, d) => Angle::pi_frac(-n, d),
            Angle::Decimal(x) => Angle::Decimal(-x),
        }
    }

    /// Whether the angle is a finite real number.
    pub fn is_finite(&self) -> bool {
        self.radians().is_finite()
    }

    /// Parses `0`, `pi`, `-pi`, `pi/3`, `pi*2/3`, `-pi*2/3`, `pi*2` or a decimal.
    pub fn parse(s: &str) -> Option<Angle> {
        if s == "0" {
            return Some(Angle::PiFrac(0, 1));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, s),
        };
        if let Some(rest) = body.strip_prefix("pi") {
            let (num_s, den_s) = match rest.split_once('/') {
                Some((a, b)) => (a, Some(b)),
                None => (rest, None),
            };
            let num: i64 = if num_s.is_empty() {
                1
            } else {
                num_s.strip_prefix('*')?.parse().ok().filter(|n: &i64| *n > 0)?
            };
            let den: u64 = match den_s {
                Some(d) => d.parse().ok().filter(|d: &u64| *d > 0)?,
                None => 1,
            };
            return Some(Angle::pi_frac(if neg { -num } else { num }, den));
        }
        s.parse::<f64>().ok().map(Angle::Decimal)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::PiFrac(0, _) => f.write_str("0"),
            Angle::PiFrac(n, d) => {
                if n < 0 {
                    f.write_str("-")?;
                }
                f.write_str("pi")?;
                let a = n.unsigned_abs();
                if a != 1 {
                    write!(f, "*{a}")?;
                }
                if d != 1 {
                    write!(f, "/{d}")?;
                }
                Ok(())
            }
            // Debug formatting always carries a decimal point or exponent, so
            // decimals never re-parse as the exact `0` form.
            Angle::Decimal(x) => write!(f, "{x:?}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

/// A p-slot of the code-controlled recursion scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PSlot {
    /// Identity: recurse on the left half.
    Ident,
    /// HalfSWAP: recurse on the right half.
    HalfSwap,
}

/// An f-slot of the code-controlled recursion scheme or of the divide-and-conquer scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FSlot {
    /// Identity.
    Ident,
    /// The function being defined.
    SelfRef,
}

/// Which length guard the code-controlled recursion scheme applies to the code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CodeBound {
    /// The base case fires when `|x| > |r0| · ilog ℓ(φ′)`.
    #[default]
    Log,
    /// No code-length guard (used by constructions whose codes are longer).
    Unbounded,
}

/// Parameters of a code-controlled fast recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct CfqRec {
    /// Base-case threshold on the data length.
    pub t: usize,
    /// Separator.
    pub r0: Bits,
    /// Code transformer applied before recursing.
    pub d: Term,
    /// Base-case function.
    pub g: Term,
    /// Recombination function.
    pub h: Term,
    /// Data steering per first code block (2^|r0| entries).
    pub p: Vec<PSlot>,
    /// Recursion selector per first code block (2^|r0| entries).
    pub f: Vec<FSlot>,
    /// Code-length guard.
    pub bound: CodeBound,
}

/// Parameters of the divide-and-conquer scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct DivConq {
    /// Base-case length threshold.
    pub k: usize,
    /// Base-case function.
    pub g: Term,
    /// Recombination applied through MidApp.
    pub h: Term,
    /// Pre-processing.
    pub p: Term,
    /// Function applied to the left half.
    pub f1: FSlot,
    /// Function applied to the right half.
    pub f2: FSlot,
}

/// A construction history.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    /// Identity.
    Ident,
    /// Phase shift on the first qubit.
    Phase(Angle),
    /// Rotation of the first qubit.
    Rot(Angle),
    /// Negation of the first qubit.
    Not,
    /// Exchange of the first two qubits.
    Swap,
    /// Projection of the first qubit onto `|a⟩` (`true` = 1).
    Meas(bool),
    /// `Compo(g, h)` = g ∘ h (h first).
    Compo(Box<Term>, Box<Term>),
    /// Branch on the first qubit: g on the 0 part, h on the 1 part.
    Branch(Box<Term>, Box<Term>),
    /// Code-controlled fast recursion.
    CfqRec(Box<CfqRec>),
    /// Logarithmically many compositions.
    LCompo(Bits, Box<Term>),
    /// g on the code `x r0`, h on the data.
    CodeSkipPlus(Bits, Box<Term>, Box<Term>),
    /// g on `x`, h on `r0 · data`.
    CodeSkipMinus(Bits, Box<Term>, Box<Term>),
    /// Moves the first code bit to the end of the code.
    CodeRemove(Bits),
    /// Moves the last code bit to the front of the code.
    CodeRep(Bits),
    /// Code-controlled wrapper f*.
    CodeControlled(Bits, Box<Term>),
    /// g on the first ⌈ℓ/2⌉ qubits, h on the rest.
    HalfD(Box<Term>, Box<Term>),
    /// h conjugated by the middle swap of width k.
    MidApp(usize, Box<Term>),
    /// Divide and conquer.
    DivConq(Box<DivConq>),
    /// Reference to a standard-library construction.
    Named(Builder),
}

/// Shorthand for `Compo(g, h)`.
pub fn compo(g: Term, h: Term) -> Term {
    Term::Compo(Box::new(g), Box::new(h))
}

/// Shorthand for `Branch(g, h)`.
pub fn branch(g: Term, h: Term) -> Term {
    Term::Branch(Box::new(g), Box::new(h))
}

impl Term {
    /// Direct subterms (excluding self references), in syntax order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Ident
            | Term::Phase(_)
            | Term::Rot(_)
            | Term::Not
            | Term::Swap
            | Term::Meas(_)
            | Term::CodeRemove(_)
            | Term::CodeRep(_)
            | Term::Named(_) => Vec::new(),
            Term::Compo(g, h) | Term::Branch(g, h) | Term::HalfD(g, h) => vec![g, h],
            Term::CodeSkipPlus(_, g, h) | Term::CodeSkipMinus(_, g, h) => vec![g, h],
            Term::LCompo(_, g) | Term::CodeControlled(_, g) | Term::MidApp(_, g) => vec![g],
            Term::CfqRec(c) => vec![&c.d, &c.g, &c.h],
            Term::DivConq(c) => vec![&c.g, &c.h, &c.p],
        }
    }

    /// Whether a `Named` node occurs anywhere in the term.
    pub fn has_named(&self) -> bool {
        matches!(self, Term::Named(_)) || self.children().into_iter().any(Term::has_named)
    }

    /// Whether a measurement occurs (after expanding named builders).
    ///
    /// Named builders that fail to build are treated as measurement-free;
    /// [`validate`] reports them separately.
    pub fn contains_meas(&self) -> bool {
        match self {
            Term::Meas(_) => true,
            Term::Named(b) => b.build().map(|t| t.contains_meas()).unwrap_or(false),
            _ => self.children().into_iter().any(Term::contains_meas),
        }
    }

    /// Replaces every `Named` node by its builder expansion.
    pub fn expand_named(&self) -> Result<Term, BuildError> {
        Ok(match self {
            Term::Named(b) => b.build()?.expand_named()?,
            Term::Ident
            | Term::Phase(_)
            | Term::Rot(_)
            | Term::Not
            | Term::Swap
            | Term::Meas(_)
            | Term::CodeRemove(_)
            | Term::CodeRep(_) => self.clone(),
            Term::Compo(g, h) => compo(g.expand_named()?, h.expand_named()?),
            Term::Branch(g, h) => branch(g.expand_named()?, h.expand_named()?),
            Term::HalfD(g, h) => Term::HalfD(Box::new(g.expand_named()?), Box::new(h.expand_named()?)),
            Term::CodeSkipPlus(r, g, h) => {
                Term::CodeSkipPlus(*r, Box::new(g.expand_named()?), Box::new(h.expand_named()?))
            }
            Term::CodeSkipMinus(r, g, h) => {
                Term::CodeSkipMinus(*r, Box::new(g.expand_named()?), Box::new(h.expand_named()?))
            }
            Term::LCompo(r, g) => Term::LCompo(*r, Box::new(g.expand_named()?)),
            Term::CodeControlled(r, g) => Term::CodeControlled(*r, Box::new(g.expand_named()?)),
            Term::MidApp(k, g) => Term::MidApp(*k, Box::new(g.expand_named()?)),
            Term::CfqRec(c) => Term::CfqRec(Box::new(CfqRec {
                d: c.d.expand_named()?,
                g: c.g.expand_named()?,
                h: c.h.expand_named()?,
                ..(**c).clone()
            })),
            Term::DivConq(c) => Term::DivConq(Box::new(DivConq {
                g: c.g.expand_named()?,
                h: c.h.expand_named()?,
                p: c.p.expand_named()?,
                ..(**c).clone()
            })),
        })
    }

    /// The constructor keyword of this node.
    pub fn keyword(&self) -> &'static str {
        match self {
            Term::Ident => "id",
            Term::Phase(_) => "phase",
            Term::Rot(_) => "rot",
            Term::Not => "not",
            Term::Swap => "swap",
            Term::Meas(_) => "meas",
            Term::Compo(..) => "compo",
            Term::Branch(..) => "branch",
            Term::CfqRec(_) => "cfqrec",
            Term::LCompo(..) => "lcompo",
            Term::CodeSkipPlus(..) => "codeskip+",
            Term::CodeSkipMinus(..) => "codeskip-",
            Term::CodeRemove(_) => "coderemove",
            Term::CodeRep(_) => "coderep",
            Term::CodeControlled(..) => "codectl",
            Term::HalfD(..) => "halfd",
            Term::MidApp(..) => "midapp",
            Term::DivConq(_) => "divconq",
            Term::Named(_) => "named",
        }
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn render_p(p: PSlot) -> &'static str {
    match p {
        PSlot::Ident => "i",
        PSlot::HalfSwap => "hs",
    }
}

fn render_f(f: FSlot) -> &'static str {
    match f {
        FSlot::Ident => "i",
        FSlot::SelfRef => "self",
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Ident => f.write_str("(id)"),
            Term::Not => f.write_str("(not)"),
            Term::Swap => f.write_str("(swap)"),
            Term::Phase(a) => write!(f, "(phase {a})"),
            Term::Rot(a) => write!(f, "(rot {a})"),
            Term::Meas(a) => write!(f, "(meas {})", u8::from(*a)),
            Term::Compo(g, h) => {
                // Flatten right-nested compositions into one n-ary form.
                write!(f, "(compo {g}")?;
                let mut rest: &Term = h;
                while let Term::Compo(a, b) = rest {
                    write!(f, " {a}")?;
                    rest = b;
                }
                write!(f, " {rest})")
            }
            Term::Branch(g, h) => write!(f, "(branch {g} {h})"),
            Term::CfqRec(c) => {
                write!(f, "(cfqrec t={} r0={} d={} g={} h={} p=(", c.t, c.r0, c.d, c.g, c.h)?;
                for (i, p) in c.p.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    f.write_str(render_p(*p))?;
                }
                f.write_str(") f=(")?;
                for (i, s) in c.f.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    f.write_str(render_f(*s))?;
                }
                f.write_str(")")?;
                if c.bound == CodeBound::Unbounded {
                    f.write_str(" bound=none")?;
                }
                f.write_str(")")
            }
            Term::LCompo(r, g) => write!(f, "(lcompo {r} {g})"),
            Term::CodeSkipPlus(r, g, h) => write!(f, "(codeskip+ {r} {g} {h})"),
            Term::CodeSkipMinus(r, g, h) => write!(f, "(codeskip- {r} {g} {h})"),
            Term::CodeRemove(r) => write!(f, "(coderemove {r})"),
            Term::CodeRep(r) => write!(f, "(coderep {r})"),
            Term::CodeControlled(r, g) => write!(f, "(codectl {r} {g})"),
            Term::HalfD(g, h) => write!(f, "(halfd {g} {h})"),
            Term::MidApp(k, h) => write!(f, "(midapp {k} {h})"),
            Term::DivConq(c) => write!(
                f,
                "(divconq k={} g={} h={} p={} f1={} f2={})",
                c.k,
                c.g,
                c.h,
                c.p,
                render_f(c.f1),
                render_f(c.f2)
            ),
            Term::Named(b) => write!(f, "(named {b})"),
        }
    }
}

/// Canonical text of a term.
pub fn render(t: &Term) -> String {
    t.to_string()
}

// ---------------------------------------------------------------------------
// S-expressions
// ---------------------------------------------------------------------------

/// A source position (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    /// Line number.
    pub line: usize,
    /// Column number (in characters).
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A parsed s-expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Sexpr {
    /// A bare token.
    Atom(String, Pos),
    /// A parenthesized list.
    List(Vec<Sexpr>, Pos),
}

impl Sexpr {
    /// Source position of the expression.
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Atom(_, p) | Sexpr::List(_, p) => *p,
        }
    }
}

/// What went wrong while parsing a term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Malformed s-expression text.
    Syntax(String),
    /// A constructor or builder name that does not exist.
    UnknownConstructor(String),
    /// Wrong number of arguments.
    Arity {
        /// The constructor.
        ctor: String,
        /// What was expected.
        expected: String,
        /// How many were given.
        found: usize,
    },
    /// An argument of the wrong shape or out of range.
    InvalidArgument(String),
}

/// A parse error with its source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {}", describe(.kind))]
pub struct ParseError {
    /// Where the error was detected.
    pub pos: Pos,
    /// What went wrong.
    pub kind: ParseErrorKind,
}

fn describe(k: &ParseErrorKind) -> String {
    match k {
        ParseErrorKind::Syntax(m) => format!("syntax error: {m}"),
        ParseErrorKind::UnknownConstructor(c) => format!("unknown constructor `{c}`"),
        ParseErrorKind::Arity { ctor, expected, found } => {
            format!("arity mismatch: `{ctor}` takes {expected} argument(s), found {found}")
        }
        ParseErrorKind::InvalidArgument(m) => format!("invalid argument: {m}"),
    }
}

impl ParseError {
    /// A new error.
    pub fn new(pos: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError { pos, kind }
    }

    pub(crate) fn invalid(pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError::new(pos, ParseErrorKind::InvalidArgument(msg.into()))
    }

    pub(crate) fn arity(pos: Pos, ctor: &str, expected: impl Into<String>, found: usize) -> ParseError {
        ParseError::new(
            pos,
            ParseErrorKind::Arity {
                ctor: ctor.into(),
                expected: expected.into(),
                found,
            },
        )
    }
}

/// Tokenizes and parses exactly one s-expression.
pub fn parse_sexpr(text: &str) -> Result<Sexpr, ParseError> {
    let mut stack: Vec<(Vec<Sexpr>, Pos)> = Vec::new();
    let mut done: Option<Sexpr> = None;
    let (mut line, mut col) = (1usize, 0usize);
    let mut chars = text.chars().peekable();
    let syntax = |pos: Pos, m: &str| ParseError::new(pos, ParseErrorKind::Syntax(m.into()));
    let emit = |e: Sexpr, stack: &mut Vec<(Vec<Sexpr>, Pos)>, done: &mut Option<Sexpr>| match stack.last_mut() {
        Some((items, _)) => {
            items.push(e);
            Ok(())
        }
        None if done.is_none() => {
            *done = Some(e);
            Ok(())
        }
        None => Err(()),
    };
    while let Some(c) = chars.next() {
        col += 1;
        let pos = Pos { line, col };
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            '#' => {
                for c2 in chars.by_ref() {
                    if c2 == '\n' {
                        line += 1;
                        col = 0;
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            '(' => {
                if stack.is_empty() && done.is_some() {
                    return Err(syntax(pos, "unexpected text after the term"));
                }
                stack.push((Vec::new(), pos));
            }
            ')' => {
                let Some((items, start)) = stack.pop() else {
                    return Err(syntax(pos, "unbalanced `)`"));
                };
                emit(Sexpr::List(items, start), &mut stack, &mut done)
                    .map_err(|_| syntax(pos, "unexpected text after the term"))?;
            }
            _ => {
                let mut tok = String::new();
                tok.push(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == '#' {
                        break;
                    }
                    tok.push(n);
                    chars.next();
                    col += 1;
                }
                emit(Sexpr::Atom(tok, pos), &mut stack, &mut done)
                    .map_err(|_| syntax(pos, "unexpected text after the term"))?;
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(syntax(*start, "unclosed `(`"));
    }
    done.ok_or_else(|| syntax(Pos { line, col: col.max(1) }, "empty input"))
}

/// An argument list split into positional and `key=value` arguments.
pub(crate) struct Args<'a> {
    pub positional: Vec<&'a Sexpr>,
    pub keyed: Vec<(String, Sexpr, Pos)>,
}

pub(crate) fn split_args(items: &[Sexpr]) -> Result<Args<'_>, ParseError> {
    let mut positional = Vec::new();
    let mut keyed = Vec::new();
    let mut i = 0;
    while i < items.len() {
        match &items[i] {
            Sexpr::Atom(a, pos) if a.len() > 1 && a.ends_with('=') => {
                let key = a[..a.len() - 1].to_string();
                let Some(v) = items.get(i + 1) else {
                    return Err(ParseError::invalid(*pos, format!("`{a}` has no value")));
                };
                keyed.push((key, v.clone(), *pos));
                i += 2;
                continue;
            }
            Sexpr::Atom(a, pos) if a.contains('=') && !a.starts_with('=') => {
                let (k, v) = a.split_once('=').expect("contains =");
                let vpos = Pos {
                    line: pos.line,
                    col: pos.col + k.chars().count() + 1,
                };
                keyed.push((k.to_string(), Sexpr::Atom(v.to_string(), vpos), *pos));
            }
            other => positional.push(other),
        }
        i += 1;
    }
    Ok(Args { positional, keyed })
}

pub(crate) fn atom<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, ParseError> {
    match e {
        Sexpr::Atom(a, _) => Ok(a),
        Sexpr::List(_, p) => Err(ParseError::invalid(*p, format!("expected {what}, found a list"))),
    }
}

pub(crate) fn parse_bits_arg(e: &Sexpr, nonempty: bool) -> Result<Bits, ParseError> {
    let a = atom(e, "a bit string")?;
    let b: Bits = a
        .parse()
        .map_err(|_| ParseError::invalid(e.pos(), format!("`{a}` is not a bit string")))?;
    if nonempty && b.is_empty() {
        return Err(ParseError::invalid(e.pos(), "separator must be nonempty"));
    }
    if nonempty && b.len() > MAX_R0_LEN {
        return Err(ParseError::invalid(
            e.pos(),
            format!("separator longer than {MAX_R0_LEN} bits"),
        ));
    }
    Ok(b)
}

pub(crate) fn parse_nat_arg(e: &Sexpr, min: usize) -> Result<usize, ParseError> {
    let a = atom(e, "a natural number")?;
    let n: usize = a
        .parse()
        .map_err(|_| ParseError::invalid(e.pos(), format!("`{a}` is not a natural number")))?;
    if n < min {
        return Err(ParseError::invalid(e.pos(), format!("`{a}` must be at least {min}")));
    }
    Ok(n)
}

pub(crate) fn parse_angle_arg(e: &Sexpr) -> Result<Angle, ParseError> {
    let a = atom(e, "an angle")?;
    Angle::parse(a).ok_or_else(|| ParseError::invalid(e.pos(), format!("`{a}` is not an angle")))
}

fn parse_fslot(e: &Sexpr) -> Result<FSlot, ParseError> {
    match atom(e, "`self` or `i`")? {
        "self" => Ok(FSlot::SelfRef),
        "i" | "id" => Ok(FSlot::Ident),
        other => Err(ParseError::invalid(
            e.pos(),
            format!("`{other}` is not an f-slot (self|i)"),
        )),
    }
}

fn parse_pslot(e: &Sexpr) -> Result<PSlot, ParseError> {
    match atom(e, "`hs` or `i`")? {
        "hs" => Ok(PSlot::HalfSwap),
        "i" | "id" => Ok(PSlot::Ident),
        other => Err(ParseError::invalid(
            e.pos(),
            format!("`{other}` is not a p-slot (hs|i)"),
        )),
    }
}

fn slot_list<T>(e: &Sexpr, one: fn(&Sexpr) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
    match e {
        Sexpr::List(items, _) => items.iter().map(one).collect(),
        Sexpr::Atom(..) => Ok(vec![one(e)?]),
    }
}

/// Parses term text (one s-expression, `#` comments allowed).
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    term_of_sexpr(&parse_sexpr(text)?)
}

/// Converts an s-expression to a term.
pub fn term_of_sexpr(e: &Sexpr) -> Result<Term, ParseError> {
    let Sexpr::List(items, pos) = e else {
        let a = atom(e, "")?;
        return Err(ParseError::invalid(
            e.pos(),
            format!("expected a parenthesized term, found `{a}`"),
        ));
    };
    let pos = *pos;
    let Some(head) = items.first() else {
        return Err(ParseError::new(pos, ParseErrorKind::Syntax("empty list".into())));
    };
    let name = atom(head, "a constructor name")?;
    if name == "named" {
        return Builder::from_sexprs(pos, &items[1..]).map(Term::Named);
    }
    let args = split_args(&items[1..])?;
    let keyed_ctor = matches!(name, "cfqrec" | "divconq");
    if !keyed_ctor {
        if let Some((k, _, kp)) = args.keyed.first() {
            return Err(ParseError::invalid(*kp, format!("`{name}` takes no keyword `{k}`")));
        }
    }
    let pa = &args.positional;
    let need = |n: usize| -> Result<(), ParseError> {
        if pa.len() == n {
            Ok(())
        } else {
            Err(ParseError::arity(pos, name, n.to_string(), pa.len()))
        }
    };
    let sub = |i: usize| -> Result<Box<Term>, ParseError> { term_of_sexpr(pa[i]).map(Box::new) };
    Ok(match name {
        "id" => {
            need(0)?;
            Term::Ident
        }
        "not" => {
            need(0)?;
            Term::Not
        }
        "swap" => {
            need(0)?;
            Term::Swap
        }
        "phase" => {
            need(1)?;
            Term::Phase(parse_angle_arg(pa[0])?)
        }
        "rot" => {
            need(1)?;
            Term::Rot(parse_angle_arg(pa[0])?)
        }
        "meas" => {
            need(1)?;
            match atom(pa[0], "0 or 1")? {
                "0" => Term::Meas(false),
                "1" => Term::Meas(true),
                other => return Err(ParseError::invalid(pa[0].pos(), format!("`{other}` is not a bit"))),
            }
        }
        "compo" => {
            if pa.len() < 2 {
                return Err(ParseError::arity(pos, name, "at least 2", pa.len()));
            }
            let mut acc = term_of_sexpr(pa[pa.len() - 1])?;
            for e in pa[..pa.len() - 1].iter().rev() {
                acc = compo(term_of_sexpr(e)?, acc);
            }
            acc
        }
        "branch" => {
            need(2)?;
            Term::Branch(sub(0)?, sub(1)?)
        }
        "halfd" => {
            need(2)?;
            Term::HalfD(sub(0)?, sub(1)?)
        }
        "lcompo" => {
            need(2)?;
            Term::LCompo(parse_bits_arg(pa[0], true)?, sub(1)?)
        }
        "codeskip+" => {
            need(3)?;
            Term::CodeSkipPlus(parse_bits_arg(pa[0], true)?, sub(1)?, sub(2)?)
        }
        "codeskip-" => {
            need(3)?;
            Term::CodeSkipMinus(parse_bits_arg(pa[0], true)?, sub(1)?, sub(2)?)
        }
        "coderemove" => {
            need(1)?;
            Term::CodeRemove(parse_bits_arg(pa[0], true)?)
        }
        "coderep" => {
            need(1)?;
            Term::CodeRep(parse_bits_arg(pa[0], true)?)
        }
        "codectl" => {
            need(2)?;
            Term::CodeControlled(parse_bits_arg(pa[0], true)?, sub(1)?)
        }
        "midapp" => {
            need(2)?;
            Term::MidApp(parse_nat_arg(pa[0], 1)?, sub(1)?)
        }
        "cfqrec" => parse_cfqrec(pos, &args)?,
        "divconq" => parse_divconq(pos, &args)?,
        other => {
            return Err(ParseError::new(
                head.pos(),
                ParseErrorKind::UnknownConstructor(other.to_string()),
            ))
        }
    })
}

fn take_keys<'a>(
    pos: Pos,
    ctor: &str,
    args: &'a Args<'_>,
    allowed: &[&str],
    required: &[&str],
) -> Result<Vec<Option<&'a Sexpr>>, ParseError> {
    if let Some(p) = args.positional.first() {
        return Err(ParseError::invalid(
            p.pos(),
            format!("`{ctor}` takes only key=value arguments"),
        ));
    }
    let mut out: Vec<Option<&Sexpr>> = vec![None; allowed.len()];
    for (k, v, kp) in &args.keyed {
        let Some(i) = allowed.iter().position(|a| a == k) else {
            return Err(ParseError::invalid(*kp, format!("`{ctor}` has no key `{k}`")));
        };
        if out[i].is_some() {
            return Err(ParseError::invalid(*kp, format!("duplicate key `{k}`")));
        }
        out[i] = Some(v);
    }
    for r in required {
        let i = allowed.iter().position(|a| a == r).expect("required key is allowed");
        if out[i].is_none() {
            return Err(ParseError::arity(pos, ctor, format!("key `{r}`"), args.keyed.len()));
        }
    }
    Ok(out)
}

fn parse_cfqrec(pos: Pos, args: &Args<'_>) -> Result<Term, ParseError> {
    const KEYS: [&str; 8] = ["t", "r0", "d", "g", "h", "p", "f", "bound"];
    let v = take_keys(pos, "cfqrec", args, &KEYS, &KEYS[..7])?;
    let r0 = parse_bits_arg(v[1].unwrap(), true)?;
    let table = 1usize << r0.len();
    let p = slot_list(v[5].unwrap(), parse_pslot)?;
    let f = slot_list(v[6].unwrap(), parse_fslot)?;
    for (name, n, e) in [("p", p.len(), v[5].unwrap()), ("f", f.len(), v[6].unwrap())] {
        if n != table {
            return Err(ParseError::arity(
                e.pos(),
                &format!("cfqrec {name}-table"),
                format!("2^|r0| = {table}"),
                n,
            ));
        }
    }
    let bound = match v[7] {
        None => CodeBound::Log,
        Some(e) => match atom(e, "`log` or `none`")? {
            "log" => CodeBound::Log,
            "none" => CodeBound::Unbounded,
            other => {
                return Err(ParseError::invalid(
                    e.pos(),
                    format!("`{other}` is not a bound (log|none)"),
                ))
            }
        },
    };
    Ok(Term::CfqRec(Box::new(CfqRec {
        t: parse_nat_arg(v[0].unwrap(), 1)?,
        r0,
        d: term_of_sexpr(v[2].unwrap())?,
        g: term_of_sexpr(v[3].unwrap())?,
        h: term_of_sexpr(v[4].unwrap())?,
        p,
        f,
        bound,
    })))
}

fn parse_divconq(pos: Pos, args: &Args<'_>) -> Result<Term, ParseError> {
    const KEYS: [&str; 6] = ["k", "g", "h", "p", "f1", "f2"];
    let v = take_keys(pos, "divconq", args, &KEYS, &KEYS)?;
    Ok(Term::DivConq(Box::new(DivConq {
        k: parse_nat_arg(v[0].unwrap(), 1)?,
        g: term_of_sexpr(v[1].unwrap())?,
        h: term_of_sexpr(v[2].unwrap())?,
        p: term_of_sexpr(v[3].unwrap())?,
        f1: parse_fslot(v[4].unwrap())?,
        f2: parse_fslot(v[5].unwrap())?,
    })))
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Severity of a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// The term is not well-formed.
    Error,
}

/// One finding of [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Severity.
    pub severity: Severity,
    /// Rule identifier, e.g. `meas-in-d`.
    pub rule: &'static str,
    /// Location as a `/`-separated path of constructor slots.
    pub path: String,
    /// Human-readable explanation.
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}] at {}: {}", self.rule, self.path, self.message)
    }
}

/// The result of [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics {
    /// Findings; empty iff the term is well-formed.
    pub items: Vec<Diagnostic>,
    /// Whether the term contains no measurement.
    pub measurement_free: bool,
}

impl Diagnostics {
    /// Whether no errors were found.
    pub fn is_ok(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Clone, Copy, Default)]
struct Ctx {
    in_d: bool,
    in_dc_p: bool,
    in_dc_slot: bool,
    codeskip_ok: bool,
}

struct Validator {
    items: Vec<Diagnostic>,
    meas: bool,
}

impl Validator {
    fn err(&mut self, rule: &'static str, path: &str, message: String) {
        self.items.push(Diagnostic {
            severity: Severity::Error,
            rule,
            path: if path.is_empty() { "/".into() } else { path.into() },
            message,
        });
    }

    fn r0(&mut self, r0: &Bits, path: &str) {
        if r0.is_empty() {
            self.err("r0-empty", path, "separator must be nonempty".into());
        }
    }

    fn visit(&mut self, t: &Term, path: &str, ctx: Ctx) {
        let at = |slot: &str| format!("{path}/{}.{slot}", t.keyword());
        match t {
            Term::Ident | Term::Not | Term::Swap => {}
            Term::Phase(a) | Term::Rot(a) => {
                if !a.is_finite() {
                    self.err("angle-finite", path, format!("angle {a} is not finite"));
                }
            }
            Term::Meas(_) => {
                self.meas = true;
                if ctx.in_d {
                    self.err("meas-in-d", path, "measurement inside a cfqrec d-slot".into());
                }
                if ctx.in_dc_p {
                    self.err("meas-in-p", path, "measurement inside a divconq p-slot".into());
                }
            }
            Term::Compo(g, h) | Term::Branch(g, h) | Term::HalfD(g, h) => {
                self.visit(g, &at("0"), ctx);
                self.visit(h, &at("1"), ctx);
            }
            Term::LCompo(r, g) | Term::CodeControlled(r, g) => {
                self.r0(r, path);
                self.visit(g, &at("g"), ctx);
            }
            Term::MidApp(k, h) => {
                if *k == 0 {
                    self.err("k-positive", path, "midapp width must be at least 1".into());
                }
                self.visit(h, &at("h"), ctx);
            }
            Term::CodeSkipPlus(r, g, h) | Term::CodeSkipMinus(r, g, h) => {
                self.r0(r, path);
                if !ctx.codeskip_ok {
                    self.err(
                        "codeskip-placement",
                        path,
                        "code skipping is only allowed inside cfqrec d/h slots or builder expansions".into(),
                    );
                }
                self.visit(g, &at("g"), ctx);
                self.visit(h, &at("h"), ctx);
            }
            Term::CodeRemove(r) | Term::CodeRep(r) => self.r0(r, path),
            Term::CfqRec(c) => {
                self.r0(&c.r0, path);
                if c.t == 0 {
                    self.err("t-positive", path, "cfqrec threshold t must be at least 1".into());
                }
                let table = if c.r0.len() > MAX_R0_LEN {
                    usize::MAX
                } else {
                    1usize << c.r0.len()
                };
                if c.p.len() != table || c.f.len() != table {
                    self.err(
                        "table-size",
                        path,
                        format!(
                            "p/f tables need 2^|r0| = {} entries (found {} and {})",
                            table,
                            c.p.len(),
                            c.f.len()
                        ),
                    );
                }
                let dh = Ctx {
                    codeskip_ok: true,
                    ..ctx
                };
                self.visit(&c.d, &at("d"), Ctx { in_d: true, ..dh });
                self.visit(&c.g, &at("g"), ctx);
                self.visit(&c.h, &at("h"), dh);
            }
            Term::DivConq(c) => {
                if ctx.in_dc_slot {
                    self.err("dc-nested", path, "divconq used inside a divconq g/h/p slot".into());
                }
                if c.k == 0 {
                    self.err("k-positive", path, "divconq threshold k must be at least 1".into());
                }
                let slot = Ctx {
                    in_dc_slot: true,
                    ..ctx
                };
                self.visit(&c.g, &at("g"), slot);
                self.visit(&c.h, &at("h"), slot);
                self.visit(&c.p, &at("p"), Ctx { in_dc_p: true, ..slot });
            }
            Term::Named(b) => match b.build() {
                Ok(exp) => self.visit(
                    &exp,
                    &format!("{path}/named.{}", b.name()),
                    Ctx {
                        codeskip_ok: true,
                        ..ctx
                    },
                ),
                Err(e) => self.err("builder-error", path, e.to_string()),
            },
        }
    }
}

/// Checks the well-formedness rules of the schemes.
pub fn validate(t: &Term) -> Diagnostics {
    let mut v = Validator {
        items: Vec::new(),
        meas: false,
    };
    v.visit(t, "", Ctx::default());
    Diagnostics {
        items: v.items,
        measurement_free: !v.meas,
    }
}

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------

/// Number of constructor nodes in the construction history (named builders
/// count as their expansion; p/f slot entries are not nodes).
pub fn complexity(t: &Term) -> Result<usize, BuildError> {
    Ok(match t {
        Term::Named(b) => complexity(&b.build()?)?,
        _ => {
            let mut n = 1;
            for c in t.children() {
                n += complexity(c)?;
            }
            n
        }
    })
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

/// Why a term could not be inverted.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvertError {
    /// The term is not invertible (contains a measurement, or a divide and
    /// conquer whose pre-processing has no supported inverse form).
    #[error("not-invertible: {0}")]
    NotInvertible(String),
    /// A named builder failed to expand.
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Structural inverse of a measurement-free term.
pub fn invert(t: &Term) -> Result<Term, InvertError> {
    let inv = |x: &Term| invert(x).map(Box::new);
    Ok(match t {
        Term::Ident => Term::Ident,
        Term::Not => Term::Not,
        Term::Swap => Term::Swap,
        Term::Phase(a) => Term::Phase(a.neg()),
        Term::Rot(a) => Term::Rot(a.neg()),
        Term::Meas(_) => return Err(InvertError::NotInvertible("measurement".into())),
        Term::Compo(g, h) => Term::Compo(inv(h)?, inv(g)?),
        Term::Branch(g, h) => Term::Branch(inv(g)?, inv(h)?),
        Term::HalfD(g, h) => Term::HalfD(inv(g)?, inv(h)?),
        Term::LCompo(r, g) => Term::LCompo(*r, inv(g)?),
        Term::CodeSkipPlus(r, g, h) => Term::CodeSkipPlus(*r, inv(g)?, inv(h)?),
        Term::CodeSkipMinus(r, g, h) => Term::CodeSkipMinus(*r, inv(g)?, inv(h)?),
        Term::CodeRemove(r) => Term::CodeRep(*r),
        Term::CodeRep(r) => Term::CodeRemove(*r),
        Term::CodeControlled(r, f) => Term::CodeControlled(*r, inv(f)?),
        Term::MidApp(k, h) => Term::MidApp(*k, inv(h)?),
        // The recursion runs d, recurses, then recombines with h; the inverse
        // undoes h first (as its code transformer), recurses with the same
        // steering, and finishes with d⁻¹.
        Term::CfqRec(c) => Term::CfqRec(Box::new(CfqRec {
            t: c.t,
            r0: c.r0,
            d: invert(&c.h)?,
            g: invert(&c.g)?,
            h: invert(&c.d)?,
            p: c.p.clone(),
            f: c.f.clone(),
            bound: c.bound,
        })),
        // F = MidApp(k,h) ∘ HalfD(F,F) ∘ p, so F⁻¹ = p⁻¹ ∘ HalfD(F⁻¹,F⁻¹) ∘ MidApp(k,h⁻¹),
        // which is again of divide-and-conquer shape when p⁻¹ is a MidApp of
        // the same width (or the identity).
        Term::DivConq(c) => {
            let new_h = match &c.p {
                Term::Ident => Term::Ident,
                Term::MidApp(k, q) if *k == c.k => invert(q)?,
                _ => {
                    return Err(InvertError::NotInvertible(
                        "divconq pre-processing must be (id) or a midapp of the same width".into(),
                    ))
                }
            };
            Term::DivConq(Box::new(DivConq {
                k: c.k,
                g: invert(&c.g)?,
                h: new_h,
                p: match invert(&c.h)? {
                    Term::Ident => Term::Ident,
                    hi => Term::MidApp(c.k, Box::new(hi)),
                },
                f1: c.f1,
                f2: c.f2,
            }))
        }
        Term::Named(b) => invert(&b.build()?)?,
    })
}
