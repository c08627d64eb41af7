//! Random closed terms, processes and execution contexts for testing.
//!
//! Generation is biased towards the interesting cases: redexes, effect
//! constants and `cc` appear often, and variables are drawn from the
//! enclosing binders so every result is closed.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::machine::{Bits, ExecutionContext};
use crate::syntax::{Process, Stack, Term};

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    /// Upper bound on [`Process::size`] (or [`Term::size`]).
    pub max_size: usize,
    pub max_stack: usize,
    /// Allow `read`, `write0`, `write1` and `end`.
    pub effects: bool,
    pub max_input: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_size: 30, max_stack: 4, effects: true, max_input: 6 }
    }
}

struct Gen<'r, R> {
    rng: &'r mut R,
    cfg: GenConfig,
    scope: Vec<String>,
}

impl<R: Rng> Gen<'_, R> {
    fn constant(&mut self) -> Term {
        let pure = [Term::CallCC, Term::Cont(Stack::empty())];
        let effects = [Term::Read, Term::Write0, Term::Write1, Term::End];
        if self.cfg.effects && self.rng.gen_bool(0.6) {
            effects.choose(self.rng).unwrap().clone()
        } else {
            pure.choose(self.rng).unwrap().clone()
        }
    }

    fn leaf(&mut self) -> Term {
        if !self.scope.is_empty() && self.rng.gen_bool(0.6) {
            Term::var(self.scope.choose(self.rng).unwrap())
        } else {
            self.constant()
        }
    }

    fn lam(&mut self, budget: usize) -> Term {
        let x = format!("x{}", self.scope.len());
        self.scope.push(x.clone());
        let body = self.term(budget - 1);
        self.scope.pop();
        Term::lam(&x, body)
    }

    /// A term of size at most `budget` (at least 1).
    fn term(&mut self, budget: usize) -> Term {
        if budget <= 1 {
            return self.leaf();
        }
        match self.rng.gen_range(0..10) {
            0 => self.leaf(),
            _ if budget == 2 => self.lam(budget),
            1..=3 => self.lam(budget),
            4..=6 if budget >= 4 => {
                // (\x. u) v
                let f_budget = self.rng.gen_range(2..budget - 1);
                let f = self.lam(f_budget);
                let a = self.term(budget - 1 - f.size());
                Term::app(f, a)
            }
            7 if budget >= 3 => {
                let s = self.closed_stack(budget - 1);
                Term::Cont(s)
            }
            _ => {
                let f_budget = self.rng.gen_range(1..budget - 1);
                let f = self.term(f_budget);
                let a = self.term(budget - 1 - f.size());
                Term::app(f, a)
            }
        }
    }

    /// A term that, in head position, keeps doing I/O: effects always get
    /// their arguments and bound variables stand for such terms or for
    /// continuations.
    fn program(&mut self, budget: usize) -> Term {
        let var = |g: &mut Self| Term::var(g.scope.choose(g.rng).unwrap());
        if budget <= 2 {
            return match self.rng.gen_range(0..4) {
                0 if !self.scope.is_empty() => var(self),
                1 if budget == 2 => Term::app(Term::Write0, Term::End),
                _ => Term::End,
            };
        }
        match self.rng.gen_range(0..12) {
            0 | 1 => Term::app(Term::Write0, self.program(budget - 2)),
            2 | 3 => Term::app(Term::Write1, self.program(budget - 2)),
            4..=6 if budget >= 7 => {
                let share = (budget - 4) / 3;
                let args: Vec<Term> = (0..3).map(|_| self.program(share.max(1))).collect();
                Term::apps(Term::Read, args)
            }
            7 | 8 => {
                // (\x. p[x]) q
                let x = format!("x{}", self.scope.len());
                let arg_budget = self.rng.gen_range(1..=(budget - 3).max(1));
                let arg = self.program(arg_budget);
                self.scope.push(x.clone());
                let body = self.program(budget.saturating_sub(3 + arg.size()).max(1));
                self.scope.pop();
                Term::app(Term::lam(&x, body), arg)
            }
            9 => {
                // cc (\k. p[k])
                let k = format!("k{}", self.scope.len());
                self.scope.push(k.clone());
                let body = self.program(budget - 3);
                self.scope.pop();
                Term::app(Term::CallCC, Term::lam(&k, body))
            }
            10 if !self.scope.is_empty() => {
                let f = var(self);
                Term::app(f, self.program(budget - 2))
            }
            11 if budget >= 9 && self.rng.gen_bool(0.2) => {
                let delta = Term::lam("w", Term::app(Term::var("w"), Term::var("w")));
                Term::app(delta.clone(), delta)
            }
            _ => Term::End,
        }
    }

    fn closed_term(&mut self, budget: usize) -> Term {
        let saved = std::mem::take(&mut self.scope);
        let t = self.term(budget);
        self.scope = saved;
        t
    }

    fn closed_stack(&mut self, mut budget: usize) -> Stack {
        let n = self.rng.gen_range(0..=self.cfg.max_stack.min(budget));
        let mut terms = Vec::with_capacity(n);
        for k in 0..n {
            if budget == 0 {
                break;
            }
            let share = (budget / (n - k)).max(1);
            let size = self.rng.gen_range(1..=share);
            let t = self.closed_term(size);
            budget = budget.saturating_sub(t.size());
            terms.push(t);
        }
        Stack::from_closed(terms)
    }
}

pub fn closed_term<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Term {
    let budget = rng.gen_range(1..=cfg.max_size.max(1));
    Gen { rng, cfg: *cfg, scope: Vec::new() }.term(budget)
}

pub fn process<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Process {
    let total = rng.gen_range(1..=cfg.max_size.max(1));
    let mut g = Gen { rng, cfg: *cfg, scope: Vec::new() };
    let head_budget = g.rng.gen_range(1..=total);
    let head = g.term(head_budget);
    let stack = g.closed_stack(total - head.size());
    Process::Pair(head, stack)
}

/// A process that mostly reads, writes and terminates rather than getting
/// stuck: the head is an I/O program over an empty or short stack.
pub fn program<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Process {
    let total = rng.gen_range(1..=cfg.max_size.max(1));
    let mut g = Gen { rng, cfg: *cfg, scope: Vec::new() };
    let head = g.program(total);
    let stack = g.closed_stack(total.saturating_sub(head.size()));
    Process::Pair(head, stack)
}

pub fn bits<R: Rng>(rng: &mut R, max_len: usize) -> Bits {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}

/// A random process, half the time an I/O [`program`], with random input
/// and an empty output.
pub fn context<R: Rng>(rng: &mut R, cfg: &GenConfig) -> ExecutionContext {
    let p = if rng.gen_bool(0.5) { program(rng, cfg) } else { process(rng, cfg) };
    let input = bits(rng, cfg.max_input);
    ExecutionContext::start(p, input)
}
