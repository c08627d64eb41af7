use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{Caveat, Checked, RealizabilityError, TruthValue};
use crate::machine::{eval_step, implements_on, Action, Bits, ExecutionContext, RowFailure};
use crate::syntax::{Process, Stack, Term};
use crate::verdict::{Limit, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSpec {
    /// Each bit is written right after it is read; the run ends with `reps e`.
    Copy,
    /// All bits are read (ending with `reps`), then the input is written out
    /// and the run ends with `e`.
    ReadAllThenWrite,
}

impl TraceSpec {
    /// The only visible trace a member may produce on `input`.
    pub fn expected(self, input: &Bits) -> Vec<Action> {
        let read = |b: bool| if b { Action::R1 } else { Action::R0 };
        let write = |b: bool| if b { Action::W1 } else { Action::W0 };
        let mut out = Vec::with_capacity(3 * input.len() + 2);
        match self {
            TraceSpec::Copy => {
                for b in input.iter() {
                    out.extend([read(b), write(b)]);
                }
                out.push(Action::REps);
            }
            TraceSpec::ReadAllThenWrite => {
                out.extend(input.iter().map(read));
                out.push(Action::REps);
                // Writes prepend, so the last bit goes first.
                let bits: Vec<bool> = input.iter().collect();
                out.extend(bits.into_iter().rev().map(write));
            }
        }
        out.push(Action::E);
        out
    }
}

/// A set of processes, given by a membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum Pole {
    /// Processes whose `≻`-chain reaches one of `seeds` within `fuel` steps.
    Finite { seeds: Vec<Process>, fuel: u64 },
    /// Processes implementing the finite function `table`.
    Function { table: BTreeMap<u64, u64>, fuel: u64 },
    /// Processes whose visible behavior on every input of length at most
    /// `max_input_len` follows `spec`.
    Trace { spec: TraceSpec, max_input_len: usize, fuel: u64 },
    Union(Vec<Pole>),
}

impl Pole {
    /// Approximations behind a positive membership answer.
    pub fn caveats(&self) -> BTreeSet<Caveat> {
        match self {
            Pole::Finite { .. } => BTreeSet::new(),
            Pole::Function { .. } => [Caveat::FiniteTable].into(),
            Pole::Trace { .. } => [Caveat::BoundedInputs].into(),
            Pole::Union(ps) => ps.iter().flat_map(Pole::caveats).collect(),
        }
    }
}

/// Why a process is not in a pole.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoleWitness {
    /// The `≻`-chain stops or loops after `steps` steps without meeting a seed.
    NoSeed { last: Process, steps: u64 },
    /// A row of the function table is not implemented.
    Row(RowFailure),
    /// The visible trace on `input` departs from the specification at its
    /// last action, or the run stops early.
    Trace { input: Bits, trace: Vec<Action>, expected: Vec<Action> },
    /// Every member of a union refutes.
    Union { members: Vec<PoleWitness> },
}

/// Membership of `p` in `pole`. Each variant's own fuel is capped by `fuel`.
pub fn pole_member(pole: &Pole, p: &Process, fuel: u64) -> Verdict<PoleWitness> {
    match pole {
        Pole::Finite { seeds, fuel: own } => finite_member(seeds, p, fuel.min(*own)),
        Pole::Function { table, fuel: own } => implements_on(p, table, fuel.min(*own)).verdict.map_witness(PoleWitness::Row),
        Pole::Trace { spec, max_input_len, fuel: own } => trace_member(*spec, *max_input_len, p, fuel.min(*own)),
        Pole::Union(members) => {
            let mut refutations = Vec::new();
            let mut unknown = None;
            for m in members {
                match pole_member(m, p, fuel) {
                    Verdict::Verified => return Verdict::Verified,
                    Verdict::Refuted(w) => refutations.push(w),
                    Verdict::Unknown(l) => {
                        unknown.get_or_insert(l);
                    }
                }
            }
            match unknown {
                Some(l) => Verdict::Unknown(l),
                None => Verdict::Refuted(PoleWitness::Union { members: refutations }),
            }
        }
    }
}

fn finite_member(seeds: &[Process], p: &Process, fuel: u64) -> Verdict<PoleWitness> {
    let mut seen = HashSet::new();
    let mut cur = p.clone();
    let mut steps = 0;
    loop {
        if seeds.contains(&cur) {
            return Verdict::Verified;
        }
        if steps == fuel {
            return Verdict::Unknown(Limit::Fuel);
        }
        let Some(next) = eval_step(&cur) else { return Verdict::Refuted(PoleWitness::NoSeed { last: cur, steps }) };
        seen.insert(cur);
        if seen.contains(&next) {
            return Verdict::Refuted(PoleWitness::NoSeed { last: next, steps: steps + 1 });
        }
        cur = next;
        steps += 1;
    }
}

enum TraceCheck {
    Pass,
    Fail(Vec<Action>),
    OutOfFuel,
}

fn check_trace(p: &Process, input: &Bits, expected: &[Action], fuel: u64) -> TraceCheck {
    let mut c = ExecutionContext::start(p.clone(), input.clone());
    let mut seen = Vec::new();
    for _ in 0..fuel {
        if matches!(c.process, Process::Top) {
            break;
        }
        let Some(a) = c.step() else { return TraceCheck::Fail(seen) };
        if !a.is_tau() {
            seen.push(a);
            if expected.get(seen.len() - 1) != Some(&a) {
                return TraceCheck::Fail(seen);
            }
        }
    }
    if !matches!(c.process, Process::Top) {
        return TraceCheck::OutOfFuel;
    }
    // `e` is the last expected label and leads to ⊤, so the prefix is whole.
    TraceCheck::Pass
}

fn trace_member(spec: TraceSpec, max_len: usize, p: &Process, fuel: u64) -> Verdict<PoleWitness> {
    let mut unknown = false;
    for input in Bits::all_up_to(max_len) {
        let expected = spec.expected(&input);
        match check_trace(p, &input, &expected, fuel) {
            TraceCheck::Pass => {}
            TraceCheck::OutOfFuel => unknown = true,
            TraceCheck::Fail(trace) => return Verdict::Refuted(PoleWitness::Trace { input, trace, expected }),
        }
    }
    if unknown {
        Verdict::Unknown(Limit::Fuel)
    } else {
        Verdict::Verified
    }
}

/// A stack of the truth value on which the realizer fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizeWitness {
    pub stack: Stack,
    pub reason: PoleWitness,
}

/// `t ⋆ π` is in the pole for every `π` of `truth`. The first stack, in
/// order, that refutes is the witness.
pub fn realizes(
    pole: &Pole,
    t: &Term,
    truth: &TruthValue,
    fuel: u64,
) -> Result<Checked<RealizeWitness>, RealizabilityError> {
    if !t.is_closed() {
        return Err(RealizabilityError::NotClosed(t.clone()));
    }
    let mut unknown = None;
    for pi in &truth.stacks {
        match pole_member(pole, &Process::Pair(t.clone(), pi.clone()), fuel) {
            Verdict::Verified => {}
            Verdict::Refuted(reason) => {
                let w = RealizeWitness { stack: pi.clone(), reason };
                return Ok(Checked::new(Verdict::Refuted(w), []));
            }
            Verdict::Unknown(l) => {
                unknown.get_or_insert(l);
            }
        }
    }
    let verdict = unknown.map_or(Verdict::Verified, Verdict::Unknown);
    let mut caveats = pole.caveats();
    if truth.all_stacks {
        caveats.insert(Caveat::SampledStacks);
    }
    Ok(Checked::new(verdict, caveats))
}
