//! Church numerals, the arithmetic and branching combinators, the fixed point
//! combinator, the storage operator `F`, the reader `R` and the writer `W`,
//! and the compilation of a numeral function into an I/O process.

use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::machine::{run, Bits, ExecutionContext, Outcome};
use crate::syntax::{parse_definitions, Definitions, Process, Stack, Term};

/// Source of the combinator library, in the concrete syntax.
pub const PRELUDE_SOURCE: &str = include_str!("prelude.kam");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatorError {
    #[error("the term is not proof-like: it contains an effect constant")]
    NotProofLike,
    #[error("the term has free variables")]
    NotClosed,
    #[error("the writer produced `{0}`, which has a leading zero")]
    MalformedOutput(Bits),
}

/// The closed terms of the library.
#[derive(Debug, Clone)]
pub struct CombinatorSet {
    pub b: Term,
    pub c: Term,
    pub h: Term,
    pub s: Term,
    pub e: Term,
    pub z: Term,
    pub y: Term,
    pub f: Term,
    pub q: Term,
    pub r: Term,
    pub v: Term,
    pub w: Term,
}

/// The parsed prelude, as definitions usable by the parser.
pub fn prelude() -> &'static Definitions {
    static PRELUDE: OnceLock<Definitions> = OnceLock::new();
    PRELUDE.get_or_init(|| parse_definitions(PRELUDE_SOURCE, None).expect("the bundled prelude parses"))
}

pub fn combinators() -> &'static CombinatorSet {
    static SET: OnceLock<CombinatorSet> = OnceLock::new();
    SET.get_or_init(|| {
        let defs = prelude();
        let get = |n: &str| defs.get(n).cloned().expect("the prelude defines every combinator");
        CombinatorSet {
            b: get("B"),
            c: get("C"),
            h: get("H"),
            s: get("S"),
            e: get("E"),
            z: get("Z"),
            y: get("Y"),
            f: get("F"),
            q: get("Q"),
            r: get("R"),
            v: get("V"),
            w: get("W"),
        }
    })
}

/// `\f. \x. f (f (... x))` with `n` applications.
pub fn church(n: u64) -> Term {
    let f = Term::var("f");
    let mut body = Term::var("x");
    for _ in 0..n {
        body = Term::App(Arc::new(f.clone()), Arc::new(body));
    }
    Term::lams(&["f", "x"], body)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Numeral(u64),
    /// The writer did not terminate cleanly within fuel.
    Unknown,
}

/// Reads a numeral back by running the writer on it: `(W t * nil, "", "")`.
pub fn decode_numeral(t: &Term, fuel: u64) -> Result<Decoded, CombinatorError> {
    if !t.is_closed() {
        return Err(CombinatorError::NotClosed);
    }
    let p = Process::Pair(Term::app(combinators().w.clone(), t.clone()), Stack::empty());
    let r = run(ExecutionContext::start(p, Bits::new()), fuel);
    if r.outcome != Outcome::Terminated || !r.last.input.is_empty() {
        return Ok(Decoded::Unknown);
    }
    let out = r.last.output;
    match crate::machine::unbin(&out) {
        Some(n) => Ok(Decoded::Numeral(n)),
        None if out.front() == Some(false) => Err(CombinatorError::MalformedOutput(out)),
        None => Ok(Decoded::Unknown),
    }
}

/// `F · W · #0 · nil`: stores its numeral argument, then writes it out.
pub fn writer_tail() -> Stack {
    let k = combinators();
    Stack::from_closed(vec![k.f.clone(), k.w.clone(), church(0)])
}

/// `#n * F · t · #0 · F · W · #0 · nil`.
pub fn storage_apply(t: &Term, n: u64) -> Result<Process, CombinatorError> {
    if !t.is_closed() {
        return Err(CombinatorError::NotClosed);
    }
    Ok(Process::Pair(church(n), storage_stack(t)))
}

fn storage_stack(t: &Term) -> Stack {
    let k = combinators();
    let tail = writer_tail();
    Stack::from_closed(vec![k.f.clone(), t.clone(), church(0)]).append(&tail)
}

/// `R * F · t · #0 · F · W · #0 · nil`: reads a number, applies `t` to it and
/// writes the result.
pub fn compile_function(t: &Term) -> Result<Process, CombinatorError> {
    if !t.is_closed() {
        return Err(CombinatorError::NotClosed);
    }
    if !t.is_proof_like() {
        return Err(CombinatorError::NotProofLike);
    }
    Ok(reader_process(storage_stack(t)))
}

/// `R * tail`.
pub fn reader_process(tail: Stack) -> Process {
    Process::Pair(combinators().r.clone(), tail)
}
