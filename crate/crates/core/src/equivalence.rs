//! The labeled transition system on processes, weak bisimilarity, single
//! β-contractions anywhere in a process, and ⊤-equivalence of execution
//! contexts.
//!
//! All checks are bounded: `fuel` limits the τ-steps spent resolving one
//! observable, `depth` limits the number of visible actions explored.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::machine::{eval_step, run, Action, Bits, ExecutionContext, Outcome};
use crate::syntax::{substitute, Position, PositionError, Process, Step, Term};
use crate::verdict::{Limit, Verdict};

pub const DEFAULT_DEPTH: usize = 16;
pub const DEFAULT_FUEL: u64 = 100_000;

/// All transitions of `p`: τ-steps mirror `≻`, the read, write and end rules
/// carry their label.
pub fn lts_step(p: &Process) -> Vec<(Action, Process)> {
    let Process::Pair(head, stack) = p else { return Vec::new() };
    match head {
        Term::Read => {
            let mut it = stack.iter();
            match (it.next(), it.next(), it.next()) {
                (Some(t), Some(u), Some(v)) => {
                    let (_, s1) = stack.split().unwrap();
                    let (_, s2) = s1.split().unwrap();
                    let (_, rest) = s2.split().unwrap();
                    vec![
                        (Action::R0, Process::Pair(t.clone(), rest.clone())),
                        (Action::R1, Process::Pair(u.clone(), rest.clone())),
                        (Action::REps, Process::Pair(v.clone(), rest.clone())),
                    ]
                }
                _ => Vec::new(),
            }
        }
        Term::Write0 | Term::Write1 => match stack.split() {
            Some((t, rest)) => {
                let a = if matches!(head, Term::Write0) { Action::W0 } else { Action::W1 };
                vec![(a, Process::Pair(t.clone(), rest.clone()))]
            }
            None => Vec::new(),
        },
        Term::End => vec![(Action::E, Process::Top)],
        _ => eval_step(p).map(|q| vec![(Action::Tau, q)]).unwrap_or_default(),
    }
}

/// The first process on the τ-chain that offers labeled transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Menu {
    pub state: Process,
    pub tau_steps: u64,
    pub entries: BTreeMap<Action, Process>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Menu(Menu),
    /// No labeled transition is ever offered: the τ-chain gets stuck or
    /// returns to a process it already visited.
    Silent,
    /// Fuel ran out before the τ-chain resolved.
    Unknown,
}

/// Follows the deterministic τ-chain from `p` for at most `fuel` τ-steps.
pub fn observable(p: &Process, fuel: u64) -> Observable {
    let mut seen: HashSet<Process> = HashSet::new();
    let mut cur = p.clone();
    let mut steps = 0;
    loop {
        let transitions = lts_step(&cur);
        match transitions.first() {
            None => return Observable::Silent,
            Some((Action::Tau, _)) => {
                if steps == fuel {
                    return Observable::Unknown;
                }
                let next = transitions.into_iter().next().unwrap().1;
                seen.insert(cur);
                if seen.contains(&next) {
                    return Observable::Silent;
                }
                cur = next;
                steps += 1;
            }
            Some(_) => {
                let entries = transitions.into_iter().collect();
                return Observable::Menu(Menu { state: cur, tau_steps: steps, entries });
            }
        }
    }
}

struct Bisim {
    fuel: u64,
    visited: HashSet<(Process, Process)>,
}

impl Bisim {
    fn check(&mut self, p: &Process, q: &Process, depth: usize, prefix: &mut Vec<Action>) -> Verdict<Vec<Action>> {
        if p == q {
            return Verdict::Verified;
        }
        let (a, b) = match (observable(p, self.fuel), observable(q, self.fuel)) {
            (Observable::Unknown, _) | (_, Observable::Unknown) => return Verdict::Unknown(Limit::Fuel),
            (Observable::Silent, Observable::Silent) => return Verdict::Verified,
            (Observable::Menu(m), Observable::Silent) | (Observable::Silent, Observable::Menu(m)) => {
                let first = *m.entries.keys().next().expect("menus are non-empty");
                return Verdict::Refuted(extend(prefix, first));
            }
            (Observable::Menu(a), Observable::Menu(b)) => (a, b),
        };
        let distinguishing = a.entries.keys().filter(|k| !b.entries.contains_key(k));
        let distinguishing = distinguishing.chain(b.entries.keys().filter(|k| !a.entries.contains_key(k)));
        if let Some(k) = distinguishing.min() {
            return Verdict::Refuted(extend(prefix, *k));
        }
        if a.state == b.state || !self.visited.insert((a.state.clone(), b.state.clone())) {
            return Verdict::Verified;
        }
        if depth == 0 {
            return Verdict::Unknown(Limit::Depth);
        }
        let mut unknown = None;
        for (label, p2) in &a.entries {
            let q2 = &b.entries[label];
            prefix.push(*label);
            let v = self.check(p2, q2, depth - 1, prefix);
            prefix.pop();
            match v {
                Verdict::Verified => {}
                Verdict::Refuted(w) => return Verdict::Refuted(w),
                Verdict::Unknown(l) => {
                    unknown.get_or_insert(l);
                }
            }
        }
        match unknown {
            Some(l) => Verdict::Unknown(l),
            None => Verdict::Verified,
        }
    }
}

fn extend(prefix: &[Action], last: Action) -> Vec<Action> {
    let mut w = prefix.to_vec();
    w.push(last);
    w
}

/// Bounded weak-bisimilarity check.
///
/// τ-steps are deterministic and only `read` branches, so each side has a
/// unique weak successor per label and the check reduces to comparing the
/// label sets of the two observables, recursively. A pair of states seen
/// before counts as matched. A refutation carries the visible actions that
/// lead to the first mismatch, ending with a label only one side offers.
pub fn weak_bisim(p: &Process, q: &Process, depth: usize, fuel: u64) -> Verdict<Vec<Action>> {
    Bisim { fuel, visited: HashSet::new() }.check(p, q, depth, &mut Vec::new())
}

/// Positions of all β-redexes in `host`: head first, then the stack from the
/// top, each term in pre-order (outer redexes before inner ones, function
/// side before argument).
pub fn beta_redexes(host: &Process) -> Vec<Position> {
    let mut out = Vec::new();
    let Process::Pair(head, stack) = host else { return out };
    collect_redexes(head, Position(vec![Step::Head]), &mut out);
    for (i, t) in stack.iter().enumerate() {
        collect_redexes(t, Position(vec![Step::Entry(i)]), &mut out);
    }
    out
}

fn collect_redexes(t: &Term, here: Position, out: &mut Vec<Position>) {
    if t.is_redex() {
        out.push(here.clone());
    }
    match t {
        Term::Lam(_, b) => collect_redexes(b, here.child(Step::Body), out),
        Term::App(f, a) => {
            collect_redexes(f, here.child(Step::Fun), out);
            collect_redexes(a, here.child(Step::Arg), out);
        }
        Term::Cont(s) => {
            for (i, e) in s.iter().enumerate() {
                collect_redexes(e, here.child(Step::Entry(i)), out);
            }
        }
        _ => {}
    }
}

/// Contracts the redex `(\x. u) v` at `at` to `u[v/x]`.
pub fn beta_contract(host: &Process, at: &Position) -> Result<Process, PositionError> {
    let redex = at.subterm(host).ok_or_else(|| PositionError::Invalid(at.clone()))?;
    let Term::App(f, v) = redex else { return Err(PositionError::NotARedex(at.clone())) };
    let Term::Lam(x, u) = &**f else { return Err(PositionError::NotARedex(at.clone())) };
    at.replace(host, substitute(u, x, v))
}

/// How a run ended, as far as ⊤-equivalence is concerned.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "fate", rename_all = "snake_case")]
pub enum Fate {
    /// Reached `(⊤, input, output)`.
    Terminated { input: Bits, output: Bits },
    /// Stuck, or provably silent forever: never reaches ⊤.
    Never,
    /// Fuel ran out.
    Unknown,
}

/// Runs `c` and classifies the result. A run that exhausts its fuel is
/// still decided when the residual τ-chain is silent.
pub fn fate(c: &ExecutionContext, fuel: u64) -> Fate {
    let r = run(c.clone(), fuel);
    match r.outcome {
        Outcome::Terminated => Fate::Terminated { input: r.last.input, output: r.last.output },
        Outcome::Stuck => Fate::Never,
        Outcome::FuelExhausted => match observable(&r.last.process, fuel) {
            Observable::Silent => Fate::Never,
            _ => Fate::Unknown,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopWitness {
    pub left: Fate,
    pub right: Fate,
}

/// Bounded ⊤-equivalence. Because `⇝` is deterministic each side has at
/// most one terminal configuration, so comparing the two fates decides it.
pub fn top_equiv(c1: &ExecutionContext, c2: &ExecutionContext, fuel: u64) -> Verdict<TopWitness> {
    let left = fate(c1, fuel);
    let right = fate(c2, fuel);
    match (&left, &right) {
        (Fate::Unknown, _) | (_, Fate::Unknown) => Verdict::Unknown(Limit::Fuel),
        (Fate::Never, Fate::Never) => Verdict::Verified,
        (a, b) if a == b => Verdict::Verified,
        _ => Verdict::Refuted(TopWitness { left, right }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_process;

    fn proc(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    fn ctx(p: &str, i: &str) -> ExecutionContext {
        ExecutionContext::start(proc(p), i.parse().unwrap())
    }

    #[test]
    fn transitions() {
        let p = proc("read * end :: cc :: write0 :: nil");
        assert_eq!(
            lts_step(&p),
            vec![
                (Action::R0, proc("end * nil")),
                (Action::R1, proc("cc * nil")),
                (Action::REps, proc("write0 * nil")),
            ]
        );
        assert_eq!(lts_step(&proc("end * cc :: nil")), vec![(Action::E, Process::Top)]);
        assert!(lts_step(&Process::Top).is_empty());
        assert!(lts_step(&proc("read * end :: end :: nil")).is_empty());
        assert!(lts_step(&proc("write1 * nil")).is_empty());
    }

    #[test]
    fn observables() {
        match observable(&proc("write0 end * nil"), 10) {
            Observable::Menu(m) => {
                assert_eq!(m.tau_steps, 1);
                assert_eq!(m.entries, BTreeMap::from([(Action::W0, proc("end * nil"))]));
            }
            other => panic!("expected a menu, got {other:?}"),
        }
        assert_eq!(observable(&proc("(\\x. x x) (\\x. x x) * nil"), 1000), Observable::Silent);
        assert_eq!(observable(&Process::Top, 10), Observable::Silent);
        assert_eq!(observable(&proc("(\\x. x x x) (\\x. x x x) * nil"), 1000), Observable::Unknown);
    }

    #[test]
    fn bisimulation_examples() {
        let p = proc("write0 (read end end end) * nil");
        assert_eq!(weak_bisim(&p, &p, 0, 0), Verdict::Verified);
        assert_eq!(weak_bisim(&proc("(\\x. x) end * nil"), &proc("end * nil"), 4, 100), Verdict::Verified);
        assert_eq!(
            weak_bisim(&proc("write0 end * nil"), &proc("write1 end * nil"), 4, 100),
            Verdict::Refuted(vec![Action::W0])
        );
        assert_eq!(
            weak_bisim(&proc("write0 end * nil"), &proc("write0 (write1 end) * nil"), 4, 100),
            Verdict::Refuted(vec![Action::W0, Action::W1])
        );
        // Stuck and silently divergent processes match.
        assert_eq!(weak_bisim(&proc("read * nil"), &proc("(\\x. x x) (\\x. x x) * nil"), 4, 100), Verdict::Verified);
        assert_eq!(
            weak_bisim(&proc("read * nil"), &proc("(\\x. x x x) (\\x. x x x) * nil"), 4, 100),
            Verdict::Unknown(Limit::Fuel)
        );
    }

    #[test]
    fn depth_bounds_the_exploration() {
        let a = proc("write0 ((\\x. x) end) * nil");
        let b = proc("write0 end * nil");
        assert_eq!(weak_bisim(&a, &b, 0, 100), Verdict::Unknown(Limit::Depth));
        assert_eq!(weak_bisim(&a, &b, 1, 100), Verdict::Verified);
    }

    #[test]
    fn redex_positions() {
        let p = proc("(\\x. x) end * nil");
        assert_eq!(beta_redexes(&p), vec![Position(vec![Step::Head])]);
        assert!(beta_redexes(&proc("end * nil")).is_empty());
        let p = proc("(\\x. x) ((\\y. y) end) * nil");
        assert_eq!(beta_redexes(&p), vec![Position(vec![Step::Head]), Position(vec![Step::Head, Step::Arg])]);
    }

    #[test]
    fn contractions() {
        let p = proc("(\\x. x) end * nil");
        assert_eq!(beta_contract(&p, &Position(vec![Step::Head])).unwrap(), proc("end * nil"));

        let p = proc("read * (\\x. x) end :: end :: end :: nil");
        let at = beta_redexes(&p)[0].clone();
        assert_eq!(at, Position(vec![Step::Entry(0)]));
        assert_eq!(beta_contract(&p, &at).unwrap(), proc("read * end :: end :: end :: nil"));

        let p = proc("\\y. (\\x. x) y * nil");
        let at = Position(vec![Step::Head, Step::Body]);
        assert_eq!(beta_contract(&p, &at).unwrap(), proc("\\y. y * nil"));

        assert!(matches!(beta_contract(&p, &Position(vec![Step::Head])), Err(PositionError::NotARedex(_))));
        assert!(matches!(beta_contract(&p, &Position(vec![Step::Entry(0)])), Err(PositionError::Invalid(_))));
    }

    #[test]
    fn contraction_under_a_capturing_binder() {
        // (\x. \y. x) y inside \y renames the inner binder.
        let p = proc("\\y. (\\x. \\y. x) y * nil");
        let q = beta_contract(&p, &Position(vec![Step::Head, Step::Body])).unwrap();
        assert_eq!(q, proc("\\y. \\z. y * nil"));
    }

    #[test]
    fn top_equivalence() {
        let top = ExecutionContext::start(Process::Top, Bits::new());
        assert_eq!(top_equiv(&ctx("end * nil", ""), &top, 10), Verdict::Verified);
        let v = top_equiv(&ctx("end * nil", ""), &ctx("end * nil", "1"), 10);
        assert!(v.is_refuted());
        assert_eq!(top_equiv(&ctx("(\\x. x x) (\\x. x x) * nil", ""), &ctx("read * nil", ""), 1000), Verdict::Verified);
        assert_eq!(
            top_equiv(&ctx("(\\x. x x x) (\\x. x x x) * nil", ""), &ctx("read * nil", ""), 1000),
            Verdict::Unknown(Limit::Fuel)
        );
        assert!(top_equiv(&ctx("end * nil", ""), &ctx("read * nil", ""), 10).is_refuted());
    }
}
