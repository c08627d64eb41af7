use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::Serialize;

use super::{pole_member, Caveat, Checked, Index, Pole, PoleWitness, Predicate, RealizabilityError, RealizerList};
use crate::syntax::{Process, Stack, Term};
use crate::verdict::Verdict;

/// One predicate on the left of a sequent, with known realizers of its value
/// at each index.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub predicate: Predicate,
    pub realizers: BTreeMap<Index, RealizerList>,
}

/// `φ1 … φn ⊢ ψ` together with the term claimed to realize it.
#[derive(Debug, Clone)]
pub struct Sequent {
    pub hypotheses: Vec<Hypothesis>,
    pub conclusion: Predicate,
    pub candidate: Term,
}

/// `candidate ⋆ realizers · stack` is not in the pole at `index`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntailmentWitness {
    pub index: Index,
    pub realizers: Vec<Term>,
    pub stack: Stack,
    pub reason: PoleWitness,
}

/// Checks `t ⋆ u1 · … · un · π ∈ ⫫` for every index `i`, every choice of
/// `uk` among the realizers of `φk(i)` and every `π ∈ ψ(i)`. Choices are
/// enumerated in lexicographic order, so the first refutation is the least.
pub fn check_entailment(pole: &Pole, seq: &Sequent, fuel: u64) -> Result<Checked<EntailmentWitness>, RealizabilityError> {
    if !seq.candidate.is_proof_like() {
        return Err(RealizabilityError::NotProofLike(seq.candidate.clone()));
    }
    if !seq.candidate.is_closed() {
        return Err(RealizabilityError::NotClosed(seq.candidate.clone()));
    }
    let indices: BTreeSet<&Index> = seq.conclusion.indices().collect();
    for h in &seq.hypotheses {
        if h.predicate.indices().collect::<BTreeSet<_>>() != indices {
            return Err(RealizabilityError::IndexMismatch);
        }
    }

    let mut unknown = None;
    for (i, psi) in seq.conclusion.iter() {
        let lists = seq
            .hypotheses
            .iter()
            .enumerate()
            .map(|(n, h)| {
                h.realizers
                    .get(i)
                    .map(|l| l.terms())
                    .ok_or_else(|| RealizabilityError::MissingRealizers(format!("hypothesis {} at index `{i}`", n + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for tuple in tuples(&lists) {
            for pi in &psi.stacks {
                let stack = tuple.iter().rev().fold(pi.clone(), |s, u| s.cons((*u).clone()));
                match pole_member(pole, &Process::Pair(seq.candidate.clone(), stack), fuel) {
                    Verdict::Verified => {}
                    Verdict::Refuted(reason) => {
                        let w = EntailmentWitness {
                            index: i.clone(),
                            realizers: tuple.iter().map(|u| (*u).clone()).collect(),
                            stack: pi.clone(),
                            reason,
                        };
                        return Ok(Checked::new(Verdict::Refuted(w), []));
                    }
                    Verdict::Unknown(l) => {
                        unknown.get_or_insert(l);
                    }
                }
            }
        }
    }

    let mut caveats = pole.caveats();
    if !seq.hypotheses.is_empty() {
        caveats.insert(Caveat::FiniteRealizers);
    }
    if seq.conclusion.iter().any(|(_, v)| v.all_stacks) {
        caveats.insert(Caveat::SampledStacks);
    }
    Ok(Checked::new(unknown.map_or(Verdict::Verified, Verdict::Unknown), caveats))
}

fn tuples<'a>(lists: &[&'a [Term]]) -> Vec<Vec<&'a Term>> {
    if lists.is_empty() {
        return vec![Vec::new()];
    }
    lists.iter().map(|l| l.iter()).multi_cartesian_product().collect()
}

/// The rules of the entailment relation, with the realizers of their premises.
#[derive(Debug, Clone)]
pub enum Rule {
    /// `φ ⊢ φ`.
    Ax,
    /// From `Γ ⊢ ⊥` realized by the term, `Γ ⊢ ψ`.
    BotE(Term),
    /// From `Γ, φ ⊢ ψ` realized by the term, `Γ ⊢ φ ⇒ ψ`.
    ImpI(Term),
    /// From `u ⊩ Γ ⊢ ψ` (with `n` hypotheses) and `t ⊩ Δ ⊢ ψ ⇒ θ` (with `m`),
    /// `Γ, Δ ⊢ θ`.
    ImpE { t: Term, u: Term, n: usize, m: usize },
    /// From `Γ ⊢ ψ`, `A, Γ ⊢ ψ`.
    Weaken(Term),
    /// From `A, A, Γ ⊢ ψ`, `A, Γ ⊢ ψ`.
    Contract(Term),
    /// From `Γ ⊢ ψ`, `σ(Γ) ⊢ ψ`; `sigma` lists `σ(1) … σ(n)`, counting from 1.
    Exchange { t: Term, sigma: Vec<usize> },
    /// `Δ ⊢ ((ψ ⇒ ⊥) ⇒ ψ) ⇒ ψ`.
    Peirce,
}

fn premise(t: &Term) -> Result<(), RealizabilityError> {
    if !t.is_closed() {
        return Err(RealizabilityError::NotClosed(t.clone()));
    }
    if !t.is_proof_like() {
        return Err(RealizabilityError::NotProofLike(t.clone()));
    }
    Ok(())
}

fn vars(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

fn lams(names: &[String], body: Term) -> Term {
    names.iter().rev().fold(body, |b, x| Term::lam(x, b))
}

fn apps(head: &Term, names: &[String]) -> Term {
    Term::apps(head.clone(), names.iter().map(|x| Term::var(x)))
}

/// The realizer of the conclusion of `rule`, built from the realizers of its
/// premises.
pub fn rule_realizer(rule: &Rule) -> Result<Term, RealizabilityError> {
    match rule {
        Rule::Ax => Ok(Term::lam("x", Term::var("x"))),
        Rule::BotE(t) | Rule::ImpI(t) => premise(t).map(|()| t.clone()),
        Rule::ImpE { t, u, n, m } => {
            premise(t)?;
            premise(u)?;
            let xs = vars("x", *n);
            let ys = vars("y", *m);
            let body = Term::app(apps(t, &ys), apps(u, &xs));
            Ok(lams(&[xs, ys].concat(), body))
        }
        Rule::Weaken(t) => premise(t).map(|()| Term::lam("x", t.clone())),
        Rule::Contract(t) => {
            premise(t)?;
            Ok(Term::lam("x", Term::apps(t.clone(), [Term::var("x"), Term::var("x")])))
        }
        Rule::Exchange { t, sigma } => {
            premise(t)?;
            let n = sigma.len();
            let mut sorted = sigma.clone();
            sorted.sort_unstable();
            if sorted != (1..=n).collect::<Vec<_>>() {
                return Err(RealizabilityError::InvalidPermutation(sigma.clone(), n));
            }
            let xs = vars("x", n);
            let binders: Vec<String> = sigma.iter().map(|&k| xs[k - 1].clone()).collect();
            Ok(lams(&binders, apps(t, &xs)))
        }
        Rule::Peirce => Ok(Term::CallCC),
    }
}
