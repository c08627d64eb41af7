use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::RealizabilityError;
use crate::syntax::{Stack, Term};

/// An opaque element of an index set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Index(pub String);

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Index {
    fn from(s: &str) -> Self {
        Index(s.to_owned())
    }
}

/// A finite set of stacks. With `all_stacks` set it stands for the set of
/// all stacks and `stacks` is a sample of it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TruthValue {
    pub stacks: Vec<Stack>,
    pub all_stacks: bool,
}

impl TruthValue {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn of(stacks: impl IntoIterator<Item = Stack>) -> Self {
        let mut tv = Self::empty();
        for s in stacks {
            tv.add(s);
        }
        tv
    }

    /// The falsest truth value, represented by `sample`.
    pub fn bottom(sample: impl IntoIterator<Item = Stack>) -> Self {
        TruthValue { all_stacks: true, ..Self::of(sample) }
    }

    pub fn len(&self) -> usize {
        self.stacks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stacks.is_empty()
    }

    fn add(&mut self, s: Stack) {
        if !self.stacks.contains(&s) {
            self.stacks.push(s);
        }
    }

    pub fn union(&self, other: &TruthValue) -> TruthValue {
        let mut tv = self.clone();
        for s in &other.stacks {
            tv.add(s.clone());
        }
        tv.all_stacks |= other.all_stacks;
        tv
    }
}

/// Closed terms known to realize some truth value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RealizerList(Vec<Term>);

impl RealizerList {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self, RealizabilityError> {
        let terms: Vec<Term> = terms.into_iter().collect();
        if let Some(t) = terms.iter().find(|t| !t.is_closed()) {
            return Err(RealizabilityError::NotClosed(t.clone()));
        }
        Ok(RealizerList(terms))
    }

    pub fn terms(&self) -> &[Term] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A function from a finite index set to truth values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Predicate(BTreeMap<Index, TruthValue>);

impl Predicate {
    pub fn new(entries: impl IntoIterator<Item = (Index, TruthValue)>) -> Self {
        Predicate(entries.into_iter().collect())
    }

    /// The same truth value at every index.
    pub fn constant(indices: impl IntoIterator<Item = Index>, value: &TruthValue) -> Self {
        Predicate(indices.into_iter().map(|i| (i, value.clone())).collect())
    }

    pub fn get(&self, i: &Index) -> Option<&TruthValue> {
        self.0.get(i)
    }

    pub fn indices(&self) -> impl Iterator<Item = &Index> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index, &TruthValue)> {
        self.0.iter()
    }

    pub fn insert(&mut self, i: Index, value: TruthValue) {
        self.0.insert(i, value);
    }
}

/// `{u · π : u ∈ realizers, π ∈ consequent}`.
pub fn implication(realizers: &RealizerList, consequent: &TruthValue) -> TruthValue {
    let mut tv = TruthValue::empty();
    for u in realizers.terms() {
        for pi in &consequent.stacks {
            tv.add(pi.cons(u.clone()));
        }
    }
    tv
}

/// Universal quantification along `f: J → I`: the value at `i` is the union
/// of `theta(j)` over the preimage of `i`. Indices of `codomain` with an
/// empty preimage get the empty truth value.
pub fn forall_along(
    f: &BTreeMap<Index, Index>,
    theta: &Predicate,
    codomain: &[Index],
) -> Result<Predicate, RealizabilityError> {
    let mut out = Predicate::constant(codomain.iter().cloned(), &TruthValue::empty());
    for (j, value) in theta.iter() {
        let i = f.get(j).ok_or_else(|| RealizabilityError::UnknownIndex(j.clone()))?;
        let slot = out.0.get_mut(i).ok_or_else(|| RealizabilityError::UnknownIndex(i.clone()))?;
        *slot = slot.union(value);
    }
    Ok(out)
}

/// Reindexing `φ ∘ f` along `f: J → I`.
pub fn reindex(f: &BTreeMap<Index, Index>, phi: &Predicate) -> Result<Predicate, RealizabilityError> {
    f.iter()
        .map(|(j, i)| {
            let v = phi.get(i).ok_or_else(|| RealizabilityError::UnknownIndex(i.clone()))?;
            Ok((j.clone(), v.clone()))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()
        .map(Predicate)
}

/// The derived connectives, expressed with implication and `bottom`. Each
/// variant carries the realizers of the antecedent of its outermost
/// implication.
#[derive(Debug, Clone)]
pub enum Encoding {
    /// `⊥ ⇒ ⊥`, given realizers of `⊥`.
    Top { bottom_realizers: Option<RealizerList> },
    /// `φ ⇒ ⊥`, given realizers of `φ`.
    Not { phi_realizers: Option<RealizerList> },
    /// `(φ ⇒ (ψ ⇒ ⊥)) ⇒ ⊥`, given realizers of `φ ⇒ (ψ ⇒ ⊥)`.
    And { antecedent_realizers: Option<RealizerList> },
    /// `(φ ⇒ ⊥) ⇒ ψ`, given realizers of `φ ⇒ ⊥`.
    Or { not_phi_realizers: Option<RealizerList>, psi: TruthValue },
}

pub fn encode(connective: &Encoding, bottom: &TruthValue) -> Result<TruthValue, RealizabilityError> {
    let missing = |what: &str| RealizabilityError::MissingRealizers(what.to_owned());
    match connective {
        Encoding::Top { bottom_realizers } => {
            Ok(implication(bottom_realizers.as_ref().ok_or_else(|| missing("the antecedent ⊥"))?, bottom))
        }
        Encoding::Not { phi_realizers } => {
            Ok(implication(phi_realizers.as_ref().ok_or_else(|| missing("the antecedent φ"))?, bottom))
        }
        Encoding::And { antecedent_realizers } => Ok(implication(
            antecedent_realizers.as_ref().ok_or_else(|| missing("the antecedent φ ⇒ (ψ ⇒ ⊥)"))?,
            bottom,
        )),
        Encoding::Or { not_phi_realizers, psi } => {
            Ok(implication(not_phi_realizers.as_ref().ok_or_else(|| missing("the antecedent φ ⇒ ⊥"))?, psi))
        }
    }
}
