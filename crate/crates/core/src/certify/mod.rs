//! Executable certificates: the constructive analyses replayed as checkable
//! invariants over recorded run traces. Each certifier emits a
//! [`CertificateReport`] with one record per named check.

mod charge;
mod delta;
mod faithful;
mod projection;
mod updateforest;

pub use charge::charge_trace;
pub use delta::delta_accounting;
pub use faithful::build_faithful;
pub use updateforest::{updateforest_trace, DeletionRule};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use serde::Serialize;

use crate::instance::{Instance, VertexId};
use crate::clustering::SupernodeId;
use crate::rational::Rational;
use crate::trace::MergeEvent;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub measured: String,
    pub bound: String,
    pub witness: String,
}

/// Append-only pass/fail ledger; the report passes iff every check does.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<CheckRecord>,
}

impl CertificateReport {
    pub fn push(
        &mut self,
        name: impl Into<String>,
        pass: bool,
        measured: impl Display,
        bound: impl Display,
        witness: impl Display,
    ) {
        self.checks.push(CheckRecord {
            name: name.into(),
            pass,
            measured: measured.to_string(),
            bound: bound.to_string(),
            witness: witness.to_string(),
        });
    }

    /// Records `measured <= bound`.
    pub fn check_le(
        &mut self,
        name: impl Into<String>,
        measured: Rational,
        bound: Rational,
        witness: impl Display,
    ) {
        self.push(name, measured <= bound, measured, bound, witness);
    }

    /// Records `measured == bound` (exact rational equality).
    pub fn check_eq(
        &mut self,
        name: impl Into<String>,
        measured: Rational,
        bound: Rational,
        witness: impl Display,
    ) {
        self.push(name, measured == bound, measured, bound, witness);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn extend(&mut self, other: CertificateReport) {
        self.checks.extend(other.checks);
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "pass": self.passed(),
            "checks": self.checks,
        })
        .to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("Fstar is not a feasible solution for the instance")]
    InfeasibleFstar,
    #[error("Tstar is not a tree")]
    NotATree,
    #[error("trace does not match the instance: {0}")]
    TraceMismatch(String),
    #[error("certifier expects a {expected} trace, got {got}")]
    WrongAlgorithm { expected: String, got: String },
}

/// Replays supernode membership from a trace, mirroring the id convention
/// of [`crate::clustering::Clustering::trivial`].
#[derive(Debug, Clone)]
pub struct Membership {
    sets: BTreeMap<SupernodeId, BTreeSet<VertexId>>,
}

impl Membership {
    pub fn initial(inst: &Instance) -> Self {
        let sets = inst
            .terminals()
            .iter()
            .enumerate()
            .map(|(id, &t)| (id, [t].into_iter().collect()))
            .collect();
        Membership { sets }
    }

    pub fn get(&self, id: SupernodeId) -> Option<&BTreeSet<VertexId>> {
        self.sets.get(&id)
    }

    pub fn live(&self) -> impl Iterator<Item = (&SupernodeId, &BTreeSet<VertexId>)> {
        self.sets.iter()
    }

    /// Applies one merge event; returns the merged member set.
    pub fn apply(&mut self, event: &MergeEvent) -> Result<BTreeSet<VertexId>, CertifyError> {
        let mut merged = BTreeSet::new();
        for id in [event.s1, event.s2].iter().chain(event.absorbed.iter()) {
            let set = self
                .sets
                .remove(id)
                .ok_or_else(|| CertifyError::TraceMismatch(format!("unknown supernode {id}")))?;
            merged.extend(set);
        }
        self.sets.insert(event.merged_into, merged.clone());
        Ok(merged)
    }
}

/// Mate-policy activity of a terminal set.
pub(crate) fn mate_active(inst: &Instance, set: &BTreeSet<VertexId>) -> bool {
    set.iter()
        .any(|&u| inst.mate(u).map_or(false, |m| !set.contains(&m)))
}
