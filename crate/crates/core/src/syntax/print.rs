use std::fmt::{self, Write};

use serde::{Serialize, Serializer};

use super::{Process, Stack, Term};

macro_rules! serialize_as_text {
    ($($ty:ty),*) => {$(
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    )*};
}

serialize_as_text!(Term, Stack, Process);

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    /// Whole term: an abstraction may extend to the right.
    Open,
    /// Function side of an application.
    Fun,
    /// Argument side of an application.
    Arg,
}

fn write_term(t: &Term, slot: Slot, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Lam(x, body) => {
            let paren = slot != Slot::Open;
            if paren {
                f.write_char('(')?;
            }
            write!(f, "\\{x}. ")?;
            write_term(body, Slot::Open, f)?;
            if paren {
                f.write_char(')')?;
            }
            Ok(())
        }
        Term::App(fun, arg) => {
            let paren = slot == Slot::Arg;
            if paren {
                f.write_char('(')?;
            }
            write_term(fun, Slot::Fun, f)?;
            f.write_char(' ')?;
            write_term(arg, Slot::Arg, f)?;
            if paren {
                f.write_char(')')?;
            }
            Ok(())
        }
        Term::CallCC => f.write_str("cc"),
        Term::Cont(stack) => write!(f, "kont{{{stack}}}"),
        Term::Read => f.write_str("read"),
        Term::Write0 => f.write_str("write0"),
        Term::Write1 => f.write_str("write1"),
        Term::End => f.write_str("end"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, Slot::Open, f)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.iter() {
            write_term(t, Slot::Open, f)?;
            f.write_str(" :: ")?;
        }
        f.write_str("nil")
    }
}

impl fmt::Debug for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Top => f.write_str("TOP"),
            Process::Pair(t, s) => {
                write_term(t, Slot::Open, f)?;
                write!(f, " * {s}")
            }
        }
    }
}

impl fmt::Debug for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
