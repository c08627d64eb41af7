//! Effect-free evaluation `≻` and the execution relation `⇝` on execution
//! contexts `(process, input, output)`.
//!
//! Writes prepend to the output, so after writing `0` then `1` the output
//! string is `"10"`. A finished run therefore holds `bin(m)` verbatim when
//! the least significant bit was written first.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::syntax::{substitute_closed, Process, Term};
use crate::verdict::{Limit, Verdict};

pub use crate::bits::{bin, unbin, Bits, BitsError};

/// Default step budget for a run.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Tau,
    R0,
    R1,
    REps,
    W0,
    W1,
    E,
}

impl Action {
    pub const LABELS: [Action; 6] = [Action::R0, Action::R1, Action::REps, Action::W0, Action::W1, Action::E];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Tau => "tau",
            Action::R0 => "r0",
            Action::R1 => "r1",
            Action::REps => "reps",
            Action::W0 => "w0",
            Action::W1 => "w1",
            Action::E => "e",
        }
    }

    pub fn is_tau(self) -> bool {
        self == Action::Tau
    }

    pub fn is_read(self) -> bool {
        matches!(self, Action::R0 | Action::R1 | Action::REps)
    }

    pub fn is_write(self) -> bool {
        matches!(self, Action::W0 | Action::W1)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown action `{0}`")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "tau" => Action::Tau,
            "r0" => Action::R0,
            "r1" => Action::R1,
            "reps" => Action::REps,
            "w0" => Action::W0,
            "w1" => Action::W1,
            "e" => Action::E,
            other => return Err(UnknownAction(other.to_string())),
        })
    }
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// One action per line.
pub fn format_trace(trace: &[Action]) -> String {
    trace.iter().map(|a| format!("{a}\n")).collect()
}

pub fn parse_trace(text: &str) -> Result<Vec<Action>, UnknownAction> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::parse).collect()
}

/// The visible part of a trace.
pub fn labels(trace: &[Action]) -> Vec<Action> {
    trace.iter().copied().filter(|a| !a.is_tau()).collect()
}

/// One step of `≻` (push, pop, save, restore). `None` when no rule applies,
/// which includes effect constants in head position.
pub fn eval_step(p: &Process) -> Option<Process> {
    let Process::Pair(head, stack) = p else { return None };
    match head {
        Term::App(f, a) => Some(Process::Pair((**f).clone(), stack.cons((**a).clone()))),
        Term::Lam(x, body) => {
            let (u, rest) = stack.split()?;
            Some(Process::Pair(substitute_closed(body, x, u), rest.clone()))
        }
        Term::CallCC => {
            let (t, rest) = stack.split()?;
            Some(Process::Pair(t.clone(), rest.cons(Term::Cont(rest.clone()))))
        }
        Term::Cont(saved) => {
            let (t, _) = stack.split()?;
            Some(Process::Pair(t.clone(), saved.clone()))
        }
        _ => None,
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExecutionContext {
    pub process: Process,
    /// Remaining input; the front is the next bit to read.
    pub input: Bits,
    /// Output so far; the front is the most recently written bit.
    pub output: Bits,
}

impl fmt::Debug for ExecutionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?}, {:?})", self.process, self.input, self.output)
    }
}

impl ExecutionContext {
    pub fn new(process: Process, input: Bits, output: Bits) -> Self {
        ExecutionContext { process, input, output }
    }

    /// `(process, input, ε)`.
    pub fn start(process: Process, input: Bits) -> Self {
        ExecutionContext { process, input, output: Bits::new() }
    }

    /// Performs one `⇝` step in place and returns its action, or `None` when
    /// the context is stuck or terminated.
    pub fn step(&mut self) -> Option<Action> {
        let Process::Pair(head, stack) = &self.process else { return None };
        let (next, action) = match head {
            Term::Read => {
                let (t, s1) = stack.split()?;
                let (u, s2) = s1.split()?;
                let (v, rest) = s2.split()?;
                let (chosen, action) = match self.input.front() {
                    Some(false) => (t, Action::R0),
                    Some(true) => (u, Action::R1),
                    None => (v, Action::REps),
                };
                (Process::Pair(chosen.clone(), rest.clone()), action)
            }
            Term::Write0 | Term::Write1 => {
                let (t, rest) = stack.split()?;
                let action = if matches!(head, Term::Write0) { Action::W0 } else { Action::W1 };
                (Process::Pair(t.clone(), rest.clone()), action)
            }
            Term::End => (Process::Top, Action::E),
            _ => (eval_step(&self.process)?, Action::Tau),
        };
        match action {
            Action::R0 | Action::R1 => {
                self.input.pop_front();
            }
            Action::W0 => self.output.push_front(false),
            Action::W1 => self.output.push_front(true),
            _ => {}
        }
        self.process = next;
        Some(action)
    }
}

/// One step of `⇝`, returning the action taken and the successor context.
pub fn exec_step(c: &ExecutionContext) -> Option<(Action, ExecutionContext)> {
    let mut next = c.clone();
    let action = next.step()?;
    Some((action, next))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Terminated,
    Stuck,
    FuelExhausted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Terminated => "terminated",
            Outcome::Stuck => "stuck",
            Outcome::FuelExhausted => "fuel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub outcome: Outcome,
    pub last: ExecutionContext,
    pub trace: Vec<Action>,
    pub steps: u64,
}

impl RunResult {
    pub fn is_terminated(&self) -> bool {
        self.outcome == Outcome::Terminated
    }

    /// Whether the run ended at `(⊤, input, output)`.
    pub fn terminated_with(&self, input: &Bits, output: &Bits) -> bool {
        self.is_terminated() && self.last.input == *input && self.last.output == *output
    }
}

impl Serialize for RunResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RunResult", 6)?;
        st.serialize_field("outcome", self.outcome.as_str())?;
        st.serialize_field("process", &self.last.process.to_string())?;
        st.serialize_field("input", &self.last.input.to_string())?;
        st.serialize_field("output", &self.last.output.to_string())?;
        st.serialize_field("steps", &self.steps)?;
        st.serialize_field("trace", &self.trace)?;
        st.end()
    }
}

/// Iterates `⇝` at most `fuel` times.
pub fn run(mut c: ExecutionContext, fuel: u64) -> RunResult {
    let mut trace = Vec::new();
    let mut steps = 0;
    let outcome = loop {
        if matches!(c.process, Process::Top) {
            break Outcome::Terminated;
        }
        if steps == fuel {
            break Outcome::FuelExhausted;
        }
        match c.step() {
            Some(a) => {
                trace.push(a);
                steps += 1;
            }
            None => break Outcome::Stuck,
        }
    };
    RunResult { outcome, last: c, trace, steps }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Pass,
    Fail,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowReport {
    pub input: u64,
    pub expected: u64,
    pub status: RowStatus,
    pub run: RunResult,
}

/// The row of a function table on which a process misbehaved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowFailure {
    pub input: u64,
    pub expected: u64,
    pub run: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplementationReport {
    pub verdict: Verdict<RowFailure>,
    pub rows: Vec<RowReport>,
}

/// Checks `(p, bin(n), ε) ⇝* (⊤, ε, bin(m))` for every row `n ↦ m` of the
/// table. The first failing row in key order is the witness; a row that runs
/// out of fuel makes the verdict unknown unless another row fails.
pub fn implements_on(p: &Process, table: &BTreeMap<u64, u64>, fuel: u64) -> ImplementationReport {
    let empty = Bits::new();
    let rows: Vec<RowReport> = table
        .iter()
        .map(|(&n, &m)| {
            let r = run(ExecutionContext::start(p.clone(), bin(n)), fuel);
            let status = match r.outcome {
                Outcome::FuelExhausted => RowStatus::Unknown,
                _ if r.terminated_with(&empty, &bin(m)) => RowStatus::Pass,
                _ => RowStatus::Fail,
            };
            RowReport { input: n, expected: m, status, run: r }
        })
        .collect();
    let verdict = if let Some(bad) = rows.iter().find(|r| r.status == RowStatus::Fail) {
        Verdict::Refuted(RowFailure { input: bad.input, expected: bad.expected, run: bad.run.clone() })
    } else if rows.iter().any(|r| r.status == RowStatus::Unknown) {
        Verdict::Unknown(Limit::Fuel)
    } else {
        Verdict::Verified
    };
    ImplementationReport { verdict, rows }
}
