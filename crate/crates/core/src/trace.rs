//! Run traces: the ordered merge events every algorithm emits, plus the
//! final clustering and forest. Serialized as JSON lines, one event per
//! line, followed by a summary record.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::clustering::SupernodeId;
use crate::forest::{total_cost, Edge};
use crate::instance::VertexId;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmTag {
    Gluttonous,
    TimedGluttonous,
    TimedGluttonousIteration,
    GluttonousContract,
    PairedGreedy,
    TimedPrimalDual,
    UnistrictA,
    GroupStrictA,
}

impl std::fmt::Display for AlgorithmTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AlgorithmTag::Gluttonous => "gluttonous",
            AlgorithmTag::TimedGluttonous => "timed-gluttonous",
            AlgorithmTag::TimedGluttonousIteration => "timed-gluttonous-iteration",
            AlgorithmTag::GluttonousContract => "gluttonous-contract",
            AlgorithmTag::PairedGreedy => "paired-greedy",
            AlgorithmTag::TimedPrimalDual => "timed-primal-dual",
            AlgorithmTag::UnistrictA => "unistrict-A",
            AlgorithmTag::GroupStrictA => "group-strict-A",
        };
        f.write_str(s)
    }
}

/// One merge performed by a solver.
///
/// `stage` is `-1` outside timed runs. For the path-contraction variant the
/// two selected supernodes are `s1, s2` and any supernodes swallowed along
/// the contracted path are listed in `absorbed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub iteration: usize,
    pub stage: i64,
    pub s1: SupernodeId,
    pub s2: SupernodeId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub absorbed: Vec<SupernodeId>,
    pub merged_into: SupernodeId,
    /// Merging distance at the moment of the merge.
    pub delta: Rational,
    pub bought: Vec<Edge>,
}

/// One selected pair of a timed stage, in the stage auxiliary-graph sense:
/// endpoints are supernode ids of the stage-start clustering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagePair {
    pub s1: SupernodeId,
    pub s2: SupernodeId,
    /// Leaders of the two stage-start supernodes.
    pub leader1: VertexId,
    pub leader2: VertexId,
    /// Punctured distance when the merge was applied.
    pub applied_delta: Rational,
    pub bought: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: i64,
    pub pairs: Vec<StagePair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: AlgorithmTag,
    /// Tie rule name and, for timed runs, the base constant c.
    pub tie_rule: String,
    pub base_c: Option<u32>,
    pub events: Vec<MergeEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageRecord>,
    pub final_clustering: Vec<(SupernodeId, BTreeSet<VertexId>)>,
    pub forest: Vec<Edge>,
    pub total_cost: Rational,
}

impl RunTrace {
    pub fn merging_distances(&self) -> Vec<Rational> {
        self.events.iter().map(|e| e.delta).collect()
    }

    pub fn sum_of_merging_distances(&self) -> Rational {
        self.events.iter().map(|e| e.delta).sum()
    }

    pub fn recompute_cost(&self) -> Rational {
        total_cost(&self.forest)
    }

    /// JSON lines: one event per line, then a summary record. The ratio
    /// field stays null until an oracle fills it.
    pub fn to_json_lines(&self, ratio: Option<Rational>) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("serializable event"));
            out.push('\n');
        }
        let summary = serde_json::json!({
            "summary": {
                "algorithm": self.algorithm,
                "tie_rule": self.tie_rule,
                "base_c": self.base_c,
                "merges": self.events.len(),
                "cost": self.total_cost,
                "ratio": ratio,
            }
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}
