//! Realizability scenarios read from JSON.
//!
//! ```json
//! {
//!   "kind": "entailment",
//!   "pole": {"kind": "finite", "seeds": ["end * nil"], "fuel": 1000},
//!   "predicates": [
//!     {"predicate": "phi", "index": "i", "stacks": ["cc :: nil"]}
//!   ],
//!   "realizers": {"phi": {"i": ["\\x. end"]}},
//!   "hypotheses": ["phi"],
//!   "conclusion": "phi",
//!   "candidate": "\\x. x",
//!   "fuel": 100000
//! }
//! ```
//!
//! Pole kinds are `finite` (`seeds`), `function` (`table` as `[n, m]`
//! pairs), `trace` (`spec`: `copy` or `read_all_then_write`,
//! `max_input_len`) and `union` (`members`). Each has an optional `fuel`.
//! A `realizes` scenario checks `candidate` against the conclusion at every
//! index; a `consistency` scenario probes `candidates` on `stack_samples`.
//! Terms and stacks use the concrete syntax and may refer to definitions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::DEFAULT_FUEL;
use crate::realizability::{
    check_entailment, consistency_probe, realizes, Checked, ConsistencyReport, EntailmentWitness, Hypothesis, Index,
    Pole, Predicate, RealizabilityError, RealizeWitness, RealizerList, Sequent, TraceSpec, TruthValue,
};
use crate::syntax::{parse_process_in, parse_stack_in, parse_term_in, Definitions, ParseError, Stack, SyntaxError, Term};
use crate::verdict::Verdict;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in {field}: {source}")]
    Syntax { field: String, source: SyntaxError },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("missing field `{0}` for this kind of scenario")]
    Missing(&'static str),
    #[error(transparent)]
    Realizability(#[from] RealizabilityError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    kind: Kind,
    pole: PoleSpec,
    #[serde(default)]
    predicates: Vec<PredicateEntry>,
    #[serde(default)]
    realizers: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    #[serde(default)]
    hypotheses: Vec<String>,
    conclusion: Option<String>,
    candidate: Option<String>,
    #[serde(default)]
    candidates: Vec<String>,
    #[serde(default)]
    stack_samples: Vec<String>,
    fuel: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Entailment,
    Realizes,
    Consistency,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PoleSpec {
    Finite { seeds: Vec<String>, fuel: Option<u64> },
    Function { table: Vec<(u64, u64)>, fuel: Option<u64> },
    Trace { spec: TraceSpec, max_input_len: usize, fuel: Option<u64> },
    Union { members: Vec<PoleSpec> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredicateEntry {
    #[serde(default = "default_predicate")]
    predicate: String,
    index: String,
    #[serde(default)]
    stacks: Vec<String>,
    #[serde(default)]
    all_stacks: bool,
}

fn default_predicate() -> String {
    "psi".to_owned()
}

/// A parsed scenario, ready to run.
#[derive(Debug, Clone)]
pub enum Scenario {
    Entailment { pole: Pole, sequent: Sequent, fuel: u64 },
    Realizes { pole: Pole, candidate: Term, truth: Predicate, fuel: u64 },
    Consistency { pole: Pole, candidates: Vec<Term>, stack_samples: Vec<Stack>, fuel: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexedCheck {
    pub index: Index,
    #[serde(flatten)]
    pub check: Checked<RealizeWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioReport {
    Entailment {
        #[serde(flatten)]
        check: Checked<EntailmentWitness>,
    },
    Realizes {
        results: Vec<IndexedCheck>,
    },
    Consistency {
        #[serde(flatten)]
        report: ConsistencyReport,
    },
}

impl ScenarioReport {
    /// The overall answer: for `realizes`, the conjunction over indices;
    /// for `consistency`, verified when every candidate has a witness and
    /// the audit passes.
    pub fn verdict(&self) -> Verdict<()> {
        match self {
            ScenarioReport::Entailment { check } => check.verdict.clone().map_witness(|_| ()),
            ScenarioReport::Realizes { results } => {
                let vs: Vec<_> = results.iter().map(|r| &r.check.verdict).collect();
                if vs.iter().any(|v| v.is_refuted()) {
                    Verdict::Refuted(())
                } else if let Some(Verdict::Unknown(l)) = vs.iter().find(|v| v.is_unknown()) {
                    Verdict::Unknown(*l)
                } else {
                    Verdict::Verified
                }
            }
            ScenarioReport::Consistency { report } => {
                use crate::realizability::ProbeOutcome;
                if report.consistent() && report.audit_passes() {
                    Verdict::Verified
                } else if report.results.iter().any(|r| r.outcome == ProbeOutcome::Unknown) {
                    Verdict::Unknown(crate::verdict::Limit::Fuel)
                } else {
                    Verdict::Refuted(())
                }
            }
        }
    }
}

struct Loader<'a> {
    defs: &'a Definitions,
}

impl Loader<'_> {
    fn term(&self, field: &str, text: &str) -> Result<Term, ScenarioError> {
        parse_term_in(text, self.defs).map_err(|e: ParseError| ScenarioError::Syntax { field: field.to_owned(), source: e.into() })
    }

    fn closed_term(&self, field: &str, text: &str) -> Result<Term, ScenarioError> {
        let t = self.term(field, text)?;
        if !t.is_closed() {
            return Err(ScenarioError::Syntax { field: field.to_owned(), source: SyntaxError::not_closed("term", &t) });
        }
        Ok(t)
    }

    fn stack(&self, field: &str, text: &str) -> Result<Stack, ScenarioError> {
        parse_stack_in(text, self.defs).map_err(|e| ScenarioError::Syntax { field: field.to_owned(), source: e })
    }

    fn pole(&self, spec: &PoleSpec) -> Result<Pole, ScenarioError> {
        Ok(match spec {
            PoleSpec::Finite { seeds, fuel } => Pole::Finite {
                seeds: seeds
                    .iter()
                    .map(|s| parse_process_in(s, self.defs).map_err(|e| ScenarioError::Syntax { field: "pole.seeds".into(), source: e }))
                    .collect::<Result<_, _>>()?,
                fuel: fuel.unwrap_or(DEFAULT_FUEL),
            },
            PoleSpec::Function { table, fuel } => {
                Pole::Function { table: table.iter().copied().collect(), fuel: fuel.unwrap_or(DEFAULT_FUEL) }
            }
            PoleSpec::Trace { spec, max_input_len, fuel } => {
                Pole::Trace { spec: *spec, max_input_len: *max_input_len, fuel: fuel.unwrap_or(DEFAULT_FUEL) }
            }
            PoleSpec::Union { members } => Pole::Union(members.iter().map(|m| self.pole(m)).collect::<Result<_, _>>()?),
        })
    }

    fn predicates(&self, entries: &[PredicateEntry]) -> Result<BTreeMap<String, Predicate>, ScenarioError> {
        let mut out: BTreeMap<String, Predicate> = BTreeMap::new();
        for e in entries {
            let field = format!("predicates.{}.{}", e.predicate, e.index);
            let stacks = e.stacks.iter().map(|s| self.stack(&field, s)).collect::<Result<Vec<_>, _>>()?;
            let value = TruthValue { all_stacks: e.all_stacks, ..TruthValue::of(stacks) };
            let pred = out.entry(e.predicate.clone()).or_default();
            let index = Index(e.index.clone());
            let merged = match pred.get(&index) {
                Some(old) => old.union(&value),
                None => value,
            };
            pred.insert(index, merged);
        }
        Ok(out)
    }

    fn realizers(&self, name: &str, per_index: &BTreeMap<String, Vec<String>>) -> Result<BTreeMap<Index, RealizerList>, ScenarioError> {
        per_index
            .iter()
            .map(|(i, terms)| {
                let field = format!("realizers.{name}.{i}");
                let terms = terms.iter().map(|t| self.closed_term(&field, t)).collect::<Result<Vec<_>, _>>()?;
                Ok((Index(i.clone()), RealizerList::new(terms)?))
            })
            .collect()
    }
}

/// Parses a scenario, resolving identifiers through `defs`.
pub fn load_scenario(json: &str, defs: &Definitions) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(json)?;
    let l = Loader { defs };
    let pole = l.pole(&file.pole)?;
    let fuel = file.fuel.unwrap_or(DEFAULT_FUEL);
    let predicates = l.predicates(&file.predicates)?;
    let lookup = |name: &str| predicates.get(name).cloned().ok_or_else(|| ScenarioError::UnknownPredicate(name.to_owned()));

    match file.kind {
        Kind::Entailment => {
            let conclusion = lookup(file.conclusion.as_deref().ok_or(ScenarioError::Missing("conclusion"))?)?;
            let candidate = l.term("candidate", file.candidate.as_deref().ok_or(ScenarioError::Missing("candidate"))?)?;
            let hypotheses = file
                .hypotheses
                .iter()
                .map(|h| {
                    let realizers = match file.realizers.get(h) {
                        Some(r) => l.realizers(h, r)?,
                        None => BTreeMap::new(),
                    };
                    Ok(Hypothesis { predicate: lookup(h)?, realizers })
                })
                .collect::<Result<_, ScenarioError>>()?;
            Ok(Scenario::Entailment { pole, sequent: Sequent { hypotheses, conclusion, candidate }, fuel })
        }
        Kind::Realizes => {
            let truth = lookup(file.conclusion.as_deref().ok_or(ScenarioError::Missing("conclusion"))?)?;
            let candidate = l.closed_term("candidate", file.candidate.as_deref().ok_or(ScenarioError::Missing("candidate"))?)?;
            Ok(Scenario::Realizes { pole, candidate, truth, fuel })
        }
        Kind::Consistency => {
            let candidates = file.candidates.iter().map(|t| l.term("candidates", t)).collect::<Result<_, _>>()?;
            let stack_samples = file.stack_samples.iter().map(|s| l.stack("stack_samples", s)).collect::<Result<_, _>>()?;
            Ok(Scenario::Consistency { pole, candidates, stack_samples, fuel })
        }
    }
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioReport, RealizabilityError> {
    match s {
        Scenario::Entailment { pole, sequent, fuel } => {
            Ok(ScenarioReport::Entailment { check: check_entailment(pole, sequent, *fuel)? })
        }
        Scenario::Realizes { pole, candidate, truth, fuel } => {
            let results = truth
                .iter()
                .map(|(i, v)| Ok(IndexedCheck { index: i.clone(), check: realizes(pole, candidate, v, *fuel)? }))
                .collect::<Result<_, RealizabilityError>>()?;
            Ok(ScenarioReport::Realizes { results })
        }
        Scenario::Consistency { pole, candidates, stack_samples, fuel } => {
            Ok(ScenarioReport::Consistency { report: consistency_probe(pole, candidates, stack_samples, *fuel)? })
        }
    }
}
