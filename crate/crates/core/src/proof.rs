//! Proof-size metrics and a forward RUP checker for DRAT proofs.

use std::fmt;

use crate::formula::Formula;
use crate::io::drat::{DratProof, StepKind};
use crate::solver::Propagator;

/// Size measures of a clausal proof. The empty clause counts as a clause of
/// length zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ProofMetrics {
    pub total_clauses: u64,
    pub additions: u64,
    pub deletions: u64,
    pub total_literals: u64,
    pub literals_in_additions: u64,
    pub literals_in_deletions: u64,
    pub max_clause_length: u64,
}

pub fn compute_proof_metrics(proof: &DratProof) -> ProofMetrics {
    let mut m = ProofMetrics::default();
    for step in &proof.steps {
        let len = step.lits.len() as u64;
        m.total_clauses += 1;
        m.total_literals += len;
        m.max_clause_length = m.max_clause_length.max(len);
        match step.kind {
            StepKind::Add => {
                m.additions += 1;
                m.literals_in_additions += len;
            }
            StepKind::Delete => {
                m.deletions += 1;
                m.literals_in_deletions += len;
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// An added clause does not follow by unit propagation.
    NotRup,
    /// Every step checks but the proof never derives a conflict.
    NoRefutation,
    /// A deletion names a clause that is not in the working set.
    MalformedDelete,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::NotRup => "not-RUP",
            RejectReason::NoRefutation => "no-refutation",
            RejectReason::MalformedDelete => "malformed-delete",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CheckReport {
    pub valid: bool,
    pub failing_step: Option<usize>,
    pub reason: Option<RejectReason>,
    /// Deletions of absent clauses skipped in lenient mode.
    pub ignored_deletions: usize,
}

impl CheckReport {
    fn accepted(ignored_deletions: usize) -> Self {
        CheckReport { valid: true, failing_step: None, reason: None, ignored_deletions }
    }

    fn rejected(step: Option<usize>, reason: RejectReason, ignored_deletions: usize) -> Self {
        CheckReport { valid: false, failing_step: step, reason: Some(reason), ignored_deletions }
    }
}

/// Strict check: deleting a clause that is not present rejects the proof.
pub fn check_rup_proof(formula: &Formula, proof: &DratProof) -> CheckReport {
    check_rup_proof_with(formula, proof, false)
}

/// Checks every addition for the RUP property against the clauses live at
/// that point, applies deletions, and requires a refutation at the end.
/// With `lenient`, deletions of absent clauses are skipped and counted.
pub fn check_rup_proof_with(formula: &Formula, proof: &DratProof, lenient: bool) -> CheckReport {
    let mut working = Propagator::new(formula.num_vars());
    for clause in formula.clauses() {
        working.add_clause(clause.lits());
    }
    let mut derived_empty = false;
    let mut ignored = 0;
    for (i, step) in proof.steps.iter().enumerate() {
        match step.kind {
            StepKind::Add => {
                if !working.is_rup(&step.lits) {
                    return CheckReport::rejected(Some(i), RejectReason::NotRup, ignored);
                }
                derived_empty |= step.lits.is_empty();
                working.add_clause(&step.lits);
            }
            StepKind::Delete => {
                if working.remove_clause(&step.lits).is_none() {
                    if !lenient {
                        return CheckReport::rejected(Some(i), RejectReason::MalformedDelete, ignored);
                    }
                    ignored += 1;
                }
            }
        }
    }
    if derived_empty || working.is_inconsistent() {
        CheckReport::accepted(ignored)
    } else {
        CheckReport::rejected(None, RejectReason::NoRefutation, ignored)
    }
}
