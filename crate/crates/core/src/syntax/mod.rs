//! Terms, stacks and processes of the machine with I/O, together with the
//! concrete syntax, capture-avoiding substitution and subterm positions.
//!
//! Terms are compared up to α-equivalence: `PartialEq` and `Hash` ignore the
//! names of bound variables.

mod parse;
mod position;
mod print;
mod subst;

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

pub use parse::{parse_definitions, parse_process, parse_process_in, parse_stack, parse_stack_in, parse_term, parse_term_in, Definitions, ParseError};
pub use position::{Position, PositionError, Step};
pub use subst::{fresh_name, substitute};
pub(crate) use subst::substitute_closed;

/// Words that cannot be used as variable names.
pub const RESERVED: &[&str] = &["cc", "read", "write0", "write1", "end", "nil", "TOP", "kont"];

/// A variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

#[derive(Clone)]
pub enum Term {
    Var(Name),
    Lam(Name, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
    CallCC,
    /// A continuation `k_π` holding a saved stack.
    Cont(Stack),
    Read,
    Write0,
    Write1,
    End,
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Name::new(name))
    }

    pub fn lam(name: &str, body: Term) -> Term {
        Term::Lam(Name::new(name), Arc::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Arc::new(fun), Arc::new(arg))
    }

    /// Left-nested application `fun a1 a2 … an`.
    pub fn apps(fun: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(fun, Term::app)
    }

    /// Nested abstraction `\x1. … \xn. body`.
    pub fn lams(names: &[&str], body: Term) -> Term {
        names.iter().rev().fold(body, |acc, n| Term::lam(n, acc))
    }

    pub fn free_variables(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        let mut bound = Vec::new();
        !has_free(self, &mut bound)
    }

    /// True when `name` occurs free in the term.
    pub fn occurs_free(&self, name: &Name) -> bool {
        match self {
            Term::Var(x) => x == name,
            Term::Lam(x, body) => x != name && body.occurs_free(name),
            Term::App(f, a) => f.occurs_free(name) || a.occurs_free(name),
            _ => false,
        }
    }

    /// A term is proof-like when it contains none of the effect constants
    /// `read`, `write0`, `write1`, `end`, including inside saved stacks.
    pub fn is_proof_like(&self) -> bool {
        match self {
            Term::Read | Term::Write0 | Term::Write1 | Term::End => false,
            Term::Var(_) | Term::CallCC => true,
            Term::Lam(_, body) => body.is_proof_like(),
            Term::App(f, a) => f.is_proof_like() && a.is_proof_like(),
            Term::Cont(stack) => stack.iter().all(Term::is_proof_like),
        }
    }

    /// True when the constant `end` occurs anywhere in the term.
    pub fn contains_end(&self) -> bool {
        match self {
            Term::End => true,
            Term::Lam(_, body) => body.contains_end(),
            Term::App(f, a) => f.contains_end() || a.contains_end(),
            Term::Cont(stack) => stack.iter().any(Term::contains_end),
            _ => false,
        }
    }

    /// Number of syntax nodes, counting the entries of saved stacks.
    pub fn size(&self) -> usize {
        match self {
            Term::Lam(_, body) => 1 + body.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Cont(stack) => 1 + stack.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn is_redex(&self) -> bool {
        matches!(self, Term::App(f, _) if matches!(**f, Term::Lam(..)))
    }
}

fn collect_free<'a>(t: &'a Term, bound: &mut Vec<&'a Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(&x) {
                out.insert(x.clone());
            }
        }
        Term::Lam(x, body) => {
            bound.push(x);
            collect_free(body, bound, out);
            bound.pop();
        }
        Term::App(f, a) => {
            collect_free(f, bound, out);
            collect_free(a, bound, out);
        }
        _ => {}
    }
}

fn has_free<'a>(t: &'a Term, bound: &mut Vec<&'a Name>) -> bool {
    match t {
        Term::Var(x) => !bound.contains(&x),
        Term::Lam(x, body) => {
            bound.push(x);
            let r = has_free(body, bound);
            bound.pop();
            r
        }
        Term::App(f, a) => has_free(f, bound) || has_free(a, bound),
        _ => false,
    }
}

// α-equivalence. `skew` counts binder pairs with differing names; while it is
// zero, pointer-equal subterms are known to be equal.
struct AlphaEq<'a> {
    env: Vec<(&'a Name, &'a Name)>,
    skew: usize,
}

impl<'a> AlphaEq<'a> {
    fn terms(&mut self, a: &'a Term, b: &'a Term) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let ix = self.env.iter().rposition(|(l, _)| *l == x);
                let iy = self.env.iter().rposition(|(_, r)| *r == y);
                match (ix, iy) {
                    (None, None) => x == y,
                    (Some(i), Some(j)) => i == j,
                    _ => false,
                }
            }
            (Term::Lam(x, bx), Term::Lam(y, by)) => {
                if self.skew == 0 && x == y && Arc::ptr_eq(bx, by) {
                    return true;
                }
                let skewed = x != y;
                self.env.push((x, y));
                self.skew += skewed as usize;
                let r = self.terms(bx, by);
                self.skew -= skewed as usize;
                self.env.pop();
                r
            }
            (Term::App(f1, a1), Term::App(f2, a2)) => {
                let fe = self.skew == 0 && Arc::ptr_eq(f1, f2);
                let ae = self.skew == 0 && Arc::ptr_eq(a1, a2);
                (fe || self.terms(f1, f2)) && (ae || self.terms(a1, a2))
            }
            (Term::Cont(s1), Term::Cont(s2)) => s1 == s2,
            (Term::CallCC, Term::CallCC)
            | (Term::Read, Term::Read)
            | (Term::Write0, Term::Write0)
            | (Term::Write1, Term::Write1)
            | (Term::End, Term::End) => true,
            _ => false,
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        AlphaEq { env: Vec::new(), skew: 0 }.terms(self, other)
    }
}

impl Eq for Term {}

fn hash_term<'a, H: Hasher>(t: &'a Term, bound: &mut Vec<&'a Name>, h: &mut H) {
    match t {
        Term::Var(x) => match bound.iter().rposition(|n| *n == x) {
            Some(i) => {
                0u8.hash(h);
                (bound.len() - i).hash(h);
            }
            None => {
                1u8.hash(h);
                x.hash(h);
            }
        },
        Term::Lam(x, body) => {
            2u8.hash(h);
            bound.push(x);
            hash_term(body, bound, h);
            bound.pop();
        }
        Term::App(f, a) => {
            3u8.hash(h);
            hash_term(f, bound, h);
            hash_term(a, bound, h);
        }
        Term::Cont(s) => {
            4u8.hash(h);
            s.hash(h);
        }
        Term::CallCC => 5u8.hash(h),
        Term::Read => 6u8.hash(h),
        Term::Write0 => 7u8.hash(h),
        Term::Write1 => 8u8.hash(h),
        Term::End => 9u8.hash(h),
    }
}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        hash_term(self, &mut Vec::new(), state);
    }
}

/// A stack of closed terms, top first, terminated by the empty stack `nil`.
///
/// Stacks are persistent lists: pushing shares the tail.
#[derive(Clone, Default)]
pub struct Stack(Option<Arc<Frame>>);

struct Frame {
    head: Term,
    tail: Stack,
    len: usize,
}

impl Stack {
    pub fn empty() -> Stack {
        Stack(None)
    }

    /// Builds a stack from its entries, top first.
    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Result<Stack, SyntaxError> {
        let terms: Vec<Term> = terms.into_iter().collect();
        if let Some(bad) = terms.iter().find(|t| !t.is_closed()) {
            return Err(SyntaxError::not_closed("stack entry", bad));
        }
        Ok(Stack::from_closed(terms))
    }

    pub(crate) fn from_closed(terms: Vec<Term>) -> Stack {
        terms.into_iter().rev().fold(Stack::empty(), |s, t| s.cons(t))
    }

    /// Pushes a term that must be closed.
    pub fn push(&self, t: Term) -> Result<Stack, SyntaxError> {
        if !t.is_closed() {
            return Err(SyntaxError::not_closed("stack entry", &t));
        }
        Ok(self.cons(t))
    }

    pub(crate) fn cons(&self, head: Term) -> Stack {
        let len = self.len() + 1;
        Stack(Some(Arc::new(Frame { head, tail: self.clone(), len })))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |f| f.len)
    }

    /// Top entry and the remaining stack.
    pub fn split(&self) -> Option<(&Term, &Stack)> {
        self.0.as_ref().map(|f| (&f.head, &f.tail))
    }

    pub fn get(&self, i: usize) -> Option<&Term> {
        self.iter().nth(i)
    }

    pub fn iter(&self) -> StackIter<'_> {
        StackIter(self)
    }

    /// The stack with its `i`-th entry replaced; entries below `i` stay shared.
    pub(crate) fn with_entry(&self, i: usize, t: Term) -> Option<Stack> {
        let mut prefix = Vec::with_capacity(i);
        let mut cur = self;
        for _ in 0..i {
            let (h, rest) = cur.split()?;
            prefix.push(h.clone());
            cur = rest;
        }
        let (_, rest) = cur.split()?;
        let mut out = rest.cons(t);
        for h in prefix.into_iter().rev() {
            out = out.cons(h);
        }
        Some(out)
    }

    /// Appends this stack on top of `base`: `self.append(base)` is `t1 :: … :: tn :: base`.
    pub fn append(&self, base: &Stack) -> Stack {
        let terms: Vec<Term> = self.iter().cloned().collect();
        terms.into_iter().rev().fold(base.clone(), |s, t| s.cons(t))
    }
}

pub struct StackIter<'a>(&'a Stack);

impl<'a> Iterator for StackIter<'a> {
    type Item = &'a Term;

    fn next(&mut self) -> Option<&'a Term> {
        let (h, rest) = self.0.split()?;
        self.0 = rest;
        Some(h)
    }
}

impl Drop for Stack {
    fn drop(&mut self) {
        // Unlink uniquely owned frames iteratively; long stacks would
        // otherwise recurse once per frame.
        let mut cur = self.0.take();
        while let Some(frame) = cur {
            match Arc::try_unwrap(frame) {
                Ok(mut f) => cur = f.tail.0.take(),
                Err(_) => break,
            }
        }
    }
}

impl PartialEq for Stack {
    fn eq(&self, other: &Stack) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let (mut a, mut b) = (self, other);
        loop {
            match (&a.0, &b.0) {
                (None, None) => return true,
                (Some(fa), Some(fb)) => {
                    if Arc::ptr_eq(fa, fb) {
                        return true;
                    }
                    if fa.head != fb.head {
                        return false;
                    }
                    a = &fa.tail;
                    b = &fb.tail;
                }
                _ => return false,
            }
        }
    }
}

impl Eq for Stack {}

impl Hash for Stack {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.len().hash(state);
        for t in self.iter() {
            t.hash(state);
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Process {
    /// `t ⋆ π` with `t` closed.
    Pair(Term, Stack),
    /// Successful termination.
    Top,
}

impl Process {
    pub fn new(term: Term, stack: Stack) -> Result<Process, SyntaxError> {
        if !term.is_closed() {
            return Err(SyntaxError::not_closed("process head", &term));
        }
        Ok(Process::Pair(term, stack))
    }

    /// True when no effect constant occurs in the head or the stack.
    pub fn is_effect_free(&self) -> bool {
        match self {
            Process::Top => true,
            Process::Pair(t, s) => t.is_proof_like() && s.iter().all(Term::is_proof_like),
        }
    }

    pub fn contains_end(&self) -> bool {
        match self {
            Process::Top => false,
            Process::Pair(t, s) => t.contains_end() || s.iter().any(Term::contains_end),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Process::Top => 1,
            Process::Pair(t, s) => t.size() + s.iter().map(Term::size).sum::<usize>(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{what} is not closed: free variables {}", .free.join(", "))]
    NotClosed { what: &'static str, free: Vec<String> },
}

impl SyntaxError {
    pub(crate) fn not_closed(what: &'static str, t: &Term) -> SyntaxError {
        SyntaxError::NotClosed {
            what,
            free: t.free_variables().iter().map(|n| n.to_string()).collect(),
        }
    }
}
