use serde::Serialize;

use super::{pole_member, Pole, RealizabilityError};
use crate::syntax::{Process, Stack, Term};
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", content = "stack", rename_all = "snake_case")]
pub enum ProbeOutcome {
    /// `t ⋆ π` is not in the pole.
    WitnessFound(Stack),
    /// Every sampled stack is accepted or undecided, and at least one is accepted.
    NoWitnessInSample,
    /// No sampled stack could be decided as a witness and some ran out of fuel.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub candidate: Term,
    pub outcome: ProbeOutcome,
}

/// A process found to be in the pole while probing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub process: Process,
    pub contains_end: bool,
    /// A member other than `⊤` with no effect constant at all.
    pub effect_free: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub results: Vec<ProbeResult>,
    pub audit: Vec<AuditEntry>,
}

impl ConsistencyReport {
    /// Every candidate has a refuting stack in the sample.
    pub fn consistent(&self) -> bool {
        self.results.iter().all(|r| matches!(r.outcome, ProbeOutcome::WitnessFound(_)))
    }

    /// No audited member is effect-free.
    pub fn audit_passes(&self) -> bool {
        self.audit.iter().all(|e| !e.effect_free)
    }
}

/// Looks, for each proof-like candidate `t`, for a sampled stack `π` with
/// `t ⋆ π` outside the pole, and records every `t ⋆ π` found inside it.
pub fn consistency_probe(
    pole: &Pole,
    candidates: &[Term],
    stack_samples: &[Stack],
    fuel: u64,
) -> Result<ConsistencyReport, RealizabilityError> {
    if let Some(t) = candidates.iter().find(|t| !t.is_proof_like()) {
        return Err(RealizabilityError::NotProofLike(t.clone()));
    }
    if let Some(t) = candidates.iter().find(|t| !t.is_closed()) {
        return Err(RealizabilityError::NotClosed(t.clone()));
    }
    let mut results = Vec::new();
    let mut audit = Vec::new();
    for t in candidates {
        let mut witness = None;
        let mut unknown = false;
        for pi in stack_samples {
            let p = Process::Pair(t.clone(), pi.clone());
            match pole_member(pole, &p, fuel) {
                Verdict::Refuted(_) => {
                    witness.get_or_insert_with(|| pi.clone());
                }
                Verdict::Unknown(_) => unknown = true,
                Verdict::Verified => audit.push(AuditEntry {
                    contains_end: p.contains_end(),
                    effect_free: p != Process::Top && p.is_effect_free(),
                    process: p,
                }),
            }
        }
        let outcome = match witness {
            Some(pi) => ProbeOutcome::WitnessFound(pi),
            None if unknown => ProbeOutcome::Unknown,
            None => ProbeOutcome::NoWitnessInSample,
        };
        results.push(ProbeResult { candidate: t.clone(), outcome });
    }
    Ok(ConsistencyReport { results, audit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::DEFAULT_FUEL;
    use crate::syntax::{parse_process, parse_stack, parse_term};

    #[test]
    fn function_pole_is_consistent_on_identity() {
        let pole = Pole::Function { table: (0..=4).map(|n| (n, n)).collect(), fuel: DEFAULT_FUEL };
        let nil = parse_stack("nil").unwrap();
        let r = consistency_probe(&pole, &[parse_term("\\x. x").unwrap()], std::slice::from_ref(&nil), DEFAULT_FUEL).unwrap();
        assert_eq!(r.results[0].outcome, ProbeOutcome::WitnessFound(nil));
        assert!(r.consistent());
    }

    #[test]
    fn finite_pole_witness() {
        let pole = Pole::Finite { seeds: vec![parse_process("end * nil").unwrap()], fuel: 100 };
        let nil = parse_stack("nil").unwrap();
        let end = parse_stack("end :: nil").unwrap();
        let r = consistency_probe(&pole, &[parse_term("\\x. x").unwrap()], &[end, nil.clone()], 100).unwrap();
        assert_eq!(r.results[0].outcome, ProbeOutcome::WitnessFound(nil));
        assert_eq!(r.audit.len(), 1);
        assert!(r.audit[0].contains_end && r.audit_passes());
    }

    #[test]
    fn effectful_candidates_are_rejected() {
        let pole = Pole::Union(vec![]);
        assert!(consistency_probe(&pole, &[Term::Read], &[], 10).is_err());
    }

    #[test]
    fn effect_free_members_are_flagged() {
        let seed = parse_process("\\x. x * nil").unwrap();
        let pole = Pole::Finite { seeds: vec![seed], fuel: 100 };
        let r = consistency_probe(&pole, &[parse_term("\\x. x").unwrap()], &[parse_stack("nil").unwrap()], 100).unwrap();
        assert_eq!(r.results[0].outcome, ProbeOutcome::NoWitnessInSample);
        assert!(!r.audit_passes());
    }
}
