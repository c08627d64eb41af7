//! Classical realizability over the machine with I/O, at desk scale.
//!
//! Truth values are finite sets of stacks and the realizers of a truth value
//! are approximated by explicit lists of terms. Whenever a `Verified` answer
//! rests on such an approximation the result carries a [`Caveat`].

mod entail;
mod pole;
mod probe;
mod truth;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::Term;
use crate::verdict::Verdict;

pub use entail::{check_entailment, rule_realizer, EntailmentWitness, Hypothesis, Rule, Sequent};
pub use pole::{pole_member, realizes, Pole, PoleWitness, RealizeWitness, TraceSpec};
pub use probe::{consistency_probe, AuditEntry, ConsistencyReport, ProbeOutcome, ProbeResult};
pub use truth::{encode, forall_along, implication, reindex, Encoding, Index, Predicate, RealizerList, TruthValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizabilityError {
    #[error("`{0}` is not proof-like")]
    NotProofLike(Term),
    #[error("`{0}` is not closed")]
    NotClosed(Term),
    #[error("no realizer list was supplied for {0}")]
    MissingRealizers(String),
    #[error("index `{0}` is not in the domain")]
    UnknownIndex(Index),
    #[error("the predicates of a sequent must share one index set")]
    IndexMismatch,
    #[error("{0:?} is not a permutation of 1..={1}")]
    InvalidPermutation(Vec<usize>, usize),
}

/// Approximations a `Verified` answer depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Caveat {
    /// A truth value stands for all stacks but only a sample was checked.
    SampledStacks,
    /// A function pole was checked on a finite table only.
    FiniteTable,
    /// A trace pole was checked on bounded-length inputs only.
    BoundedInputs,
    /// Realizers of hypotheses come from a finite list.
    FiniteRealizers,
}

/// A verdict with the approximations behind it. Caveats are only attached to
/// `Verified` answers: refutations are exact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checked<W> {
    #[serde(flatten)]
    pub verdict: Verdict<W>,
    pub caveats: BTreeSet<Caveat>,
}

impl<W> Checked<W> {
    pub(crate) fn new(verdict: Verdict<W>, caveats: impl IntoIterator<Item = Caveat>) -> Self {
        let caveats = if verdict.is_verified() { caveats.into_iter().collect() } else { BTreeSet::new() };
        Checked { verdict, caveats }
    }

    /// `Verified` with no approximation involved.
    pub fn is_exact(&self) -> bool {
        self.verdict.is_verified() && self.caveats.is_empty()
    }
}
