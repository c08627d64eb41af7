use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{Process, Term};

/// One child selector on the way to a subterm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// The head term of a process.
    Head,
    /// The `i`-th entry (top is 0) of a process stack or a continuation's saved stack.
    Entry(usize),
    /// Body of an abstraction.
    Body,
    /// Function side of an application.
    Fun,
    /// Argument side of an application.
    Arg,
}

/// Path from the root of a process to one of its subterms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position(pub Vec<Step>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PositionError {
    #[error("position {0} does not address a subterm")]
    Invalid(Position),
    #[error("position {0} does not address a beta-redex")]
    NotARedex(Position),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            match s {
                Step::Head => f.write_str("head")?,
                Step::Entry(n) => write!(f, "{n}")?,
                Step::Body => f.write_str("body")?,
                Step::Fun => f.write_str("fun")?,
                Step::Arg => f.write_str("arg")?,
            }
        }
        Ok(())
    }
}

impl Position {
    pub fn child(&self, step: Step) -> Position {
        let mut p = self.0.clone();
        p.push(step);
        Position(p)
    }

    /// The subterm of `host` at this position.
    pub fn subterm<'a>(&self, host: &'a Process) -> Option<&'a Term> {
        let Process::Pair(head, stack) = host else { return None };
        let (first, rest) = self.0.split_first()?;
        let root = match first {
            Step::Head => head,
            Step::Entry(i) => stack.get(*i)?,
            _ => return None,
        };
        rest.iter().try_fold(root, |t, step| match (t, step) {
            (Term::Lam(_, b), Step::Body) => Some(&**b),
            (Term::App(f, _), Step::Fun) => Some(&**f),
            (Term::App(_, a), Step::Arg) => Some(&**a),
            (Term::Cont(s), Step::Entry(i)) => s.get(*i),
            _ => None,
        })
    }

    /// Rebuilds `host` with the subterm at this position replaced.
    pub fn replace(&self, host: &Process, new: Term) -> Result<Process, PositionError> {
        let invalid = || PositionError::Invalid(self.clone());
        let Process::Pair(head, stack) = host else { return Err(invalid()) };
        let (first, rest) = self.0.split_first().ok_or_else(invalid)?;
        match first {
            Step::Head => {
                let h = replace_in(head, rest, new).ok_or_else(invalid)?;
                Ok(Process::Pair(h, stack.clone()))
            }
            Step::Entry(i) => {
                let entry = stack.get(*i).ok_or_else(invalid)?;
                let e = replace_in(entry, rest, new).ok_or_else(invalid)?;
                Ok(Process::Pair(head.clone(), stack.with_entry(*i, e).ok_or_else(invalid)?))
            }
            _ => Err(invalid()),
        }
    }
}

fn replace_in(t: &Term, path: &[Step], new: Term) -> Option<Term> {
    let Some((step, rest)) = path.split_first() else { return Some(new) };
    match (t, step) {
        (Term::Lam(x, b), Step::Body) => Some(Term::Lam(x.clone(), Arc::new(replace_in(b, rest, new)?))),
        (Term::App(f, a), Step::Fun) => Some(Term::App(Arc::new(replace_in(f, rest, new)?), a.clone())),
        (Term::App(f, a), Step::Arg) => Some(Term::App(f.clone(), Arc::new(replace_in(a, rest, new)?))),
        (Term::Cont(s), Step::Entry(i)) => {
            let e = replace_in(s.get(*i)?, rest, new)?;
            Some(Term::Cont(s.with_entry(*i, e)?))
        }
        _ => None,
    }
}
