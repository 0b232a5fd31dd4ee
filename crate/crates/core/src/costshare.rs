//! Cost shares driven by the timed greedy run, and the executable
//! strictness verifiers: the uni-strict reconnection bound, the nesting of
//! full-run and reduced-run clusterings, and the group-strict candidate
//! forest built from stage pairs, equivalence classes over moats, and the
//! good/bad/dropped classification.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::certify::{CertifyError, CertificateReport, Membership};
use crate::clustering::{ActivityPolicy, Clustering, PuncturedMetric};
use crate::forest::{Edge, UnionFind};
use crate::greedy::{leader, timed_gluttonous, TieRule};
use crate::instance::{Instance, VertexId};
use crate::primal_dual::{group_strict_a, unistrict_a, MoatHistory};
use crate::rational::{int_pow, Rational};
use crate::trace::RunTrace;

/// Approximation ratio of timed gluttonous as a function of the base:
/// `96 * (c^2 + 1)`, which is 480 at the default `c = 2`.
pub fn gamma_tg(c: u32) -> Rational {
    Rational::from_int(96) * (int_pow(c, 2) + Rational::ONE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeTag {
    Unistrict,
    Groupstrict,
}

/// One recorded contribution to a pair's share.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShareProvenance {
    pub stage: i64,
    pub leader: VertexId,
    pub amount: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostShareTable {
    pub scheme: SchemeTag,
    pub c: u32,
    pub gamma: Rational,
    /// Share per demand-pair index.
    pub shares: Vec<Rational>,
    pub provenance: Vec<Vec<ShareProvenance>>,
    /// For the uni-strict scheme: the largest stage in which each terminal
    /// led a merging supernode, if any.
    pub ell: BTreeMap<VertexId, i64>,
}

impl CostShareTable {
    pub fn total(&self) -> Rational {
        self.shares.iter().copied().sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable table")
    }
}

/// Largest stage in which each terminal is the leader of a supernode that
/// merges in that stage, read off the stage pair records.
fn leader_stages(trace: &RunTrace) -> BTreeMap<VertexId, i64> {
    let mut ell = BTreeMap::new();
    for record in &trace.stages {
        for pair in &record.pairs {
            for t in [pair.leader1, pair.leader2] {
                let e = ell.entry(t).or_insert(record.stage);
                *e = (*e).max(record.stage);
            }
        }
    }
    ell
}

/// Uni-strict shares: `chi(s, sbar) = (c^ell_s + c^ell_sbar) / (2 gamma)`,
/// with a zero contribution for a terminal that never leads a merge.
pub fn chi_unistrict(inst: &Instance, c: u32, tie: &TieRule) -> Result<(CostShareTable, RunTrace), crate::greedy::TimedError> {
    let trace = timed_gluttonous(inst, c, tie)?;
    let gamma = gamma_tg(c);
    let ell = leader_stages(&trace);
    let two_gamma = Rational::from_int(2) * gamma;
    let mut shares = Vec::new();
    let mut provenance = Vec::new();
    for &(s, t) in inst.demands() {
        let mut contributions = Vec::new();
        let mut total = Rational::ZERO;
        for term in [s, t] {
            if let Some(&stage) = ell.get(&term) {
                let amount = int_pow(c, stage) / two_gamma;
                total += amount;
                contributions.push(ShareProvenance {
                    stage,
                    leader: term,
                    amount,
                });
            }
        }
        shares.push(total);
        provenance.push(contributions);
    }
    Ok((
        CostShareTable {
            scheme: SchemeTag::Unistrict,
            c,
            gamma,
            shares,
            provenance,
            ell,
        },
        trace,
    ))
}

/// Group-strict shares: every stage pair grants `c^(i+1) / (2 gamma)` to the
/// demand pair of each of its two leaders (twice to the same pair when the
/// leaders are mates).
pub fn chi_groupstrict(inst: &Instance, c: u32, tie: &TieRule) -> Result<(CostShareTable, RunTrace), crate::greedy::TimedError> {
    let trace = timed_gluttonous(inst, c, tie)?;
    let table = chi_groupstrict_from_trace(inst, c, &trace);
    Ok((table, trace))
}

pub fn chi_groupstrict_from_trace(inst: &Instance, c: u32, trace: &RunTrace) -> CostShareTable {
    let gamma = gamma_tg(c);
    let two_gamma = Rational::from_int(2) * gamma;
    let pair_of: BTreeMap<VertexId, usize> = inst
        .demands()
        .iter()
        .enumerate()
        .flat_map(|(k, &(s, t))| [(s, k), (t, k)])
        .collect();
    let mut shares = vec![Rational::ZERO; inst.num_pairs()];
    let mut provenance = vec![Vec::new(); inst.num_pairs()];
    for record in &trace.stages {
        let amount = int_pow(c, record.stage + 1) / two_gamma;
        for pair in &record.pairs {
            for t in [pair.leader1, pair.leader2] {
                let k = pair_of[&t];
                shares[k] += amount;
                provenance[k].push(ShareProvenance {
                    stage: record.stage,
                    leader: t,
                    amount,
                });
            }
        }
    }
    CostShareTable {
        scheme: SchemeTag::Groupstrict,
        c,
        gamma,
        shares,
        provenance,
        ell: leader_stages(trace),
    }
}

/// Reconnection distance between `s` and `t` in the metric with the forest
/// contracted.
fn reconnection_distance(inst: &Instance, f: &[Edge], s: VertexId, t: VertexId) -> Rational {
    let plain: Vec<(VertexId, VertexId)> = f.iter().map(|e| (e.u, e.v)).collect();
    inst.contract_edges(&plain).dist(s, t)
}

/// Uni-strictness verification for one target pair: remove it, run the
/// uni-strict algorithm on the rest, and check both reconnection bounds.
pub fn verify_unistrict(
    inst: &Instance,
    target: usize,
    c: u32,
    tie: &TieRule,
) -> Result<CertificateReport, CertifyError> {
    if target >= inst.num_pairs() {
        return Err(CertifyError::TraceMismatch(format!(
            "target pair {target} out of range"
        )));
    }
    let (table, _) = chi_unistrict(inst, c, tie)
        .map_err(|e| CertifyError::TraceMismatch(e.to_string()))?;
    let (s, t) = inst.demands()[target];
    let reduced_demands: Vec<(VertexId, VertexId)> = inst
        .demands()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != target)
        .map(|(_, &p)| p)
        .collect();
    let reduced = Instance::from_parts(
        (0..inst.num_vertices())
            .map(|i| (0..inst.num_vertices()).map(|j| inst.dist(i, j)).collect())
            .collect(),
        reduced_demands,
    );
    let fprime = unistrict_a(&reduced, c, tie)
        .map_err(|e| CertifyError::TraceMismatch(e.to_string()))?;
    let d0 = reconnection_distance(inst, &fprime.forest, s, t);

    let mut report = CertificateReport::default();
    let pow = |term: VertexId| -> Rational {
        match table.ell.get(&term) {
            Some(&l) => int_pow(c, l + 1),
            None => Rational::ZERO,
        }
    };
    let lemma_bound = Rational::from_int(4) * (pow(s) + pow(t));
    report.check_le(
        format!("reconnection-4c-bound-pair-{target}"),
        d0,
        lemma_bound,
        format!("d(s,sbar) in M/F' for pair ({s},{t})"),
    );
    let beta = Rational::from_int(16) * table.gamma;
    report.check_le(
        format!("strictness-beta-bound-pair-{target}"),
        d0,
        beta * table.shares[target],
        format!("beta = 16 gamma = {beta}"),
    );
    Ok(report)
}

struct NeverActive;

impl ActivityPolicy for NeverActive {
    fn is_active(&self, _members: &BTreeSet<VertexId>) -> bool {
        false
    }
}

/// Stage-start clusterings 0..=last reconstructed from a timed trace. Entry
/// `i` is the partition of the terminal set at the beginning of stage `i`.
fn stage_start_clusterings(
    inst: &Instance,
    trace: &RunTrace,
    last: i64,
) -> Result<Vec<Vec<BTreeSet<VertexId>>>, CertifyError> {
    let mut members = Membership::initial(inst);
    let mut out = Vec::new();
    let mut events = trace.events.iter().peekable();
    for stage in 0..=last {
        while let Some(e) = events.peek() {
            if e.stage < stage {
                let e = events.next().expect("peeked");
                members.apply(e)?;
            } else {
                break;
            }
        }
        out.push(members.live().map(|(_, set)| set.clone()).collect());
    }
    Ok(out)
}

/// Nesting verification: run the timed algorithm with and without the
/// target pair and check, stage by stage, the exact set relations between
/// the two clusterings and the punctured distance bounds of the reduced
/// run.
pub fn verify_nesting(
    inst: &Instance,
    target: usize,
    c: u32,
    tie: &TieRule,
) -> Result<CertificateReport, CertifyError> {
    if target >= inst.num_pairs() {
        return Err(CertifyError::TraceMismatch(format!(
            "target pair {target} out of range"
        )));
    }
    let (s, sbar) = inst.demands()[target];
    let level = inst.dist(s, sbar).ceil_log(c).unwrap_or(0);
    let full = timed_gluttonous(inst, c, tie)
        .map_err(|e| CertifyError::TraceMismatch(e.to_string()))?;
    let reduced_demands: Vec<(VertexId, VertexId)> = inst
        .demands()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != target)
        .map(|(_, &p)| p)
        .collect();
    let reduced_inst = Instance::from_parts(
        (0..inst.num_vertices())
            .map(|i| (0..inst.num_vertices()).map(|j| inst.dist(i, j)).collect())
            .collect(),
        reduced_demands,
    );
    let reduced = timed_gluttonous(&reduced_inst, c, tie)
        .map_err(|e| CertifyError::TraceMismatch(e.to_string()))?;
    let full_stages = stage_start_clusterings(inst, &full, level)?;
    let reduced_stages = stage_start_clusterings(&reduced_inst, &reduced, level)?;

    let mut report = CertificateReport::default();
    for i in 0..=level {
        let ci = &full_stages[i as usize];
        let ci_red = &reduced_stages[i as usize];
        let cs = ci
            .iter()
            .find(|set| set.contains(&s))
            .expect("s clustered")
            .clone();
        let csbar = ci
            .iter()
            .find(|set| set.contains(&sbar))
            .expect("sbar clustered")
            .clone();
        let same = cs == csbar;

        // Part (a): every reduced supernode sits inside C_s (minus s),
        // inside C_sbar (minus sbar), or equals a full-run supernode; the
        // pieces cover, and the remainder matches exactly.
        let mut inside_s: BTreeSet<VertexId> = BTreeSet::new();
        let mut inside_sbar: BTreeSet<VertexId> = BTreeSet::new();
        let mut rest: Vec<&BTreeSet<VertexId>> = Vec::new();
        let mut classified = true;
        for x in ci_red {
            if x.iter().all(|v| cs.contains(v)) {
                inside_s.extend(x.iter().copied());
            } else if !same && x.iter().all(|v| csbar.contains(v)) {
                inside_sbar.extend(x.iter().copied());
            } else if ci.iter().any(|y| y == x) {
                rest.push(x);
            } else {
                classified = false;
            }
        }
        let mut target_s: BTreeSet<VertexId> = cs.iter().copied().collect();
        target_s.remove(&s);
        let covered = if same {
            target_s.remove(&sbar);
            inside_s == target_s
        } else {
            let mut target_sbar: BTreeSet<VertexId> = csbar.iter().copied().collect();
            target_sbar.remove(&sbar);
            inside_s == target_s && inside_sbar == target_sbar
        };
        let expected_rest: Vec<&BTreeSet<VertexId>> = ci
            .iter()
            .filter(|y| **y != cs && **y != csbar)
            .collect();
        let rest_match = rest.len() == expected_rest.len()
            && expected_rest.iter().all(|y| rest.iter().any(|x| x == y));
        report.push(
            format!("nesting-a-stage-{i}"),
            classified && covered && rest_match,
            format!(
                "classified={classified} covered={covered} rest={rest_match}"
            ),
            "exact set relations",
            format!("pair {target}, stage {i}"),
        );

        // Parts (b)/(c): distance bounds in the punctured metric of the
        // reduced run.
        let groups: Vec<BTreeSet<VertexId>> = ci_red.clone();
        let cl = Clustering::from_groups(groups, &NeverActive);
        let pm = PuncturedMetric::build(&reduced_inst, &cl);
        if same {
            report.check_le(
                format!("nesting-c-stage-{i}"),
                pm.distance(s, sbar),
                Rational::from_int(4) * int_pow(c, i),
                format!("d(s,sbar) in reduced punctured metric, stage {i}"),
            );
        } else {
            let mut worst = Rational::ZERO;
            for &v in cs.iter().filter(|&&v| v != s) {
                worst = worst.max(pm.distance(s, v));
            }
            for &v in csbar.iter().filter(|&&v| v != sbar) {
                worst = worst.max(pm.distance(sbar, v));
            }
            report.check_le(
                format!("nesting-b-stage-{i}"),
                worst,
                Rational::from_int(2) * int_pow(c, i),
                format!("max distance to co-members, stage {i}"),
            );
        }
    }
    Ok(report)
}

/// Per-stage classification of the timed stage pairs against the moats of
/// the group-strict primal-dual run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageClassification {
    pub stage: i64,
    pub good: Vec<(usize, usize)>,
    pub bad: Vec<(usize, usize)>,
    pub dropped: Vec<(usize, usize)>,
    pub good_edges: Vec<Edge>,
    pub bad_edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct F2Construction {
    pub stages: Vec<StageClassification>,
    pub f1: Vec<Edge>,
    pub f2: Vec<Edge>,
    pub total_share_d2: Rational,
}

impl F2Construction {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable construction")
    }
}

/// Group-strictness verification: build F1 from the group-strict algorithm
/// on D1, replay the timed run on the full demand set, classify its stage
/// pairs through the moat equivalence, and check feasibility plus the cost
/// bounds of the emitted candidate forest.
pub fn verify_groupstrict(
    inst: &Instance,
    d1: &[usize],
    d2: &[usize],
    c: u32,
    tie: &TieRule,
) -> Result<(F2Construction, CertificateReport), CertifyError> {
    let d1set: BTreeSet<usize> = d1.iter().copied().collect();
    let d2set: BTreeSet<usize> = d2.iter().copied().collect();
    if !d1set.is_disjoint(&d2set) {
        return Err(CertifyError::TraceMismatch(
            "D1 and D2 overlap".to_string(),
        ));
    }
    for &k in d1set.iter().chain(d2set.iter()) {
        if k >= inst.num_pairs() {
            return Err(CertifyError::TraceMismatch(format!(
                "pair index {k} out of range"
            )));
        }
    }
    let dist_copy = || -> Vec<Vec<Rational>> {
        (0..inst.num_vertices())
            .map(|i| (0..inst.num_vertices()).map(|j| inst.dist(i, j)).collect())
            .collect()
    };
    // D must be exactly D1 u D2 for the scheme; shares come from the run on
    // the full demand list restricted to those pairs.
    let full_pairs: Vec<(VertexId, VertexId)> = d1set
        .iter()
        .chain(d2set.iter())
        .map(|&k| inst.demands()[k])
        .collect();
    let full_inst = Instance::from_parts(dist_copy(), full_pairs.clone());
    let d1_inst = Instance::from_parts(
        dist_copy(),
        d1set.iter().map(|&k| inst.demands()[k]).collect(),
    );
    let d1_terms: BTreeSet<VertexId> = d1set
        .iter()
        .flat_map(|&k| {
            let (a, b) = inst.demands()[k];
            [a, b]
        })
        .collect();
    let d2_terms: BTreeSet<VertexId> = d2set
        .iter()
        .flat_map(|&k| {
            let (a, b) = inst.demands()[k];
            [a, b]
        })
        .collect();

    let (f1_trace, history) =
        group_strict_a(&d1_inst, c).map_err(|e| CertifyError::TraceMismatch(e.to_string()))?;
    let run = timed_gluttonous(&full_inst, c, tie)
        .map_err(|e| CertifyError::TraceMismatch(e.to_string()))?;
    let table = chi_groupstrict_from_trace(&full_inst, c, &run);
    let max_stage = run.stages.last().map_or(-1, |r| r.stage);
    let stage_clusterings = stage_start_clusterings(&full_inst, &run, max_stage.max(0))?;

    let mut report = CertificateReport::default();
    let mut stages_out = Vec::new();
    let mut f2: Vec<Edge> = Vec::new();
    let mut bad_total = Rational::ZERO;
    for record in &run.stages {
        if record.pairs.is_empty() {
            continue;
        }
        let i = record.stage;
        // Supernodes at the beginning of this stage, with their leaders.
        let start = &stage_clusterings[i as usize];
        // Map supernode id -> leader. Ids in the stage pairs refer to the
        // trace's numbering; reconstruct it by replaying memberships.
        let mut members = Membership::initial(&full_inst);
        for e in &run.events {
            if e.stage < i {
                members.apply(e)?;
            }
        }
        let leaders: BTreeMap<usize, VertexId> = members
            .live()
            .map(|(&id, set)| (id, leader(&full_inst, set).expect("terminal supernode")))
            .collect();
        let _ = start;
        // Equivalence classes: same moat at the end of TPD stage i, both
        // leaders in D1.
        let boundary = Rational::from_int(6) * int_pow(c, i + 1);
        let moats = history.components_before(boundary);
        let class_of = |id: usize| -> usize {
            let l = leaders[&id];
            if d1_terms.contains(&l) {
                if let Some(m) = moats.iter().position(|m| m.contains(&l)) {
                    return m;
                }
            }
            // Unique class for everyone else.
            usize::MAX - id
        };
        // Maximal acyclic subset after collapsing classes, scanning the
        // stage pairs in lexicographic order.
        let mut ordered: Vec<&crate::trace::StagePair> = record.pairs.iter().collect();
        ordered.sort_by_key(|p| (p.s1.min(p.s2), p.s1.max(p.s2)));
        let mut class_ids: Vec<usize> = ordered
            .iter()
            .flat_map(|p| [class_of(p.s1), class_of(p.s2)])
            .collect();
        class_ids.sort_unstable();
        class_ids.dedup();
        let class_index: BTreeMap<usize, usize> = class_ids
            .iter()
            .enumerate()
            .map(|(ix, &c)| (c, ix))
            .collect();
        let mut uf = UnionFind::new(class_ids.len());
        let mut good = Vec::new();
        let mut bad = Vec::new();
        let mut dropped = Vec::new();
        let mut good_edges = Vec::new();
        let mut bad_edges = Vec::new();
        for p in ordered {
            let (ca, cb) = (class_index[&class_of(p.s1)], class_index[&class_of(p.s2)]);
            let keep = ca != cb && uf.union(ca, cb);
            let key = (p.s1.min(p.s2), p.s1.max(p.s2));
            if !keep {
                dropped.push(key);
                continue;
            }
            let l1_in_d2 = d2_terms.contains(&p.leader1);
            let l2_in_d2 = d2_terms.contains(&p.leader2);
            if l1_in_d2 || l2_in_d2 {
                good.push(key);
                good_edges.extend(p.bought.iter().copied());
            } else {
                bad.push(key);
                bad_edges.extend(p.bought.iter().copied());
            }
        }
        bad_total += Rational::from_int(bad.len() as i128)
            * (int_pow(c, i + 1) - int_pow(c, i));
        f2.extend(good_edges.iter().copied());
        f2.extend(bad_edges.iter().copied());
        stages_out.push(StageClassification {
            stage: i,
            good,
            bad,
            dropped,
            good_edges,
            bad_edges,
        });
    }

    // (1) Feasibility: F1 u F2 connects every pair of D2 (Lemma moats).
    let mut uf = UnionFind::new(inst.num_vertices());
    for u in 0..inst.num_vertices() {
        for v in (u + 1)..inst.num_vertices() {
            if inst.dist(u, v).is_zero() {
                uf.union(u, v);
            }
        }
    }
    for e in f1_trace.forest.iter().chain(f2.iter()) {
        uf.union(e.u, e.v);
    }
    let feasible = d2set.iter().all(|&k| {
        let (a, b) = inst.demands()[k];
        uf.same(a, b)
    });
    report.push(
        "f1-f2-feasible-for-d2",
        feasible,
        if feasible { "connected" } else { "disconnected pair" },
        "every D2 pair connected",
        format!("|D1|={} |D2|={}", d1set.len(), d2set.len()),
    );

    // (2) cost(F2) <= 6 gamma * total D2 share.
    let dedup: BTreeMap<(VertexId, VertexId), Rational> =
        f2.iter().map(|e| (e.key(), e.len)).collect();
    let f2_cost: Rational = dedup.values().copied().sum();
    // Shares indexed by position in the full_inst demand list (D1 then D2).
    let total_share_d2: Rational = full_inst
        .demands()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k >= d1set.len())
        .map(|(k, _)| table.shares[k])
        .sum();
    report.check_le(
        "f2-cost-le-6gamma-share",
        f2_cost,
        Rational::from_int(6) * table.gamma * total_share_d2,
        format!("total D2 share {total_share_d2}"),
    );

    // (3) Lemma goodcost: total F2 cost covers the bad-pair account.
    report.push(
        "f2-cost-ge-bad-account",
        f2_cost >= Rational::from_int(3) * bad_total,
        f2_cost,
        format!("3 * sum n_b (c^(i+1)-c^i) = {}", Rational::from_int(3) * bad_total),
        "lemma goodcost",
    );

    // (4) Kept pairs acyclic after collapsing classes (by construction of
    // the union-find scan; re-checked here over the collapsed graph).
    let mut acyclic = true;
    for sc in &stages_out {
        let kept = sc.good.len() + sc.bad.len();
        let mut classes: BTreeSet<usize> = BTreeSet::new();
        // Count distinct classes touched; a forest needs |edges| < |nodes|.
        for &(a, b) in sc.good.iter().chain(sc.bad.iter()) {
            classes.insert(a);
            classes.insert(b);
        }
        if kept > 0 && kept > classes.len().saturating_sub(1) {
            acyclic = false;
        }
    }
    report.push(
        "kept-pairs-acyclic",
        acyclic,
        if acyclic { "acyclic" } else { "cycle detected" },
        "maximal acyclic subset",
        "per stage, after collapsing equivalence classes",
    );

    let construction = F2Construction {
        stages: stages_out,
        f1: f1_trace.forest.clone(),
        f2: dedup
            .into_iter()
            .map(|((u, v), len)| Edge::new(u, v, len))
            .collect(),
        total_share_d2,
    };
    Ok((construction, report))
}

/// Re-exported moat history type for callers that want stage snapshots.
pub type GroupStrictHistory = MoatHistory;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::steiner_forest_exact;
    use crate::instance::{gen_ladder, gen_random};

    fn r(n: i128) -> Rational {
        Rational::from_int(n)
    }

    fn single_pair(d: i128) -> Instance {
        Instance::from_parts(vec![vec![r(0), r(d)], vec![r(d), r(0)]], vec![(0, 1)])
    }

    #[test]
    fn gamma_default() {
        assert_eq!(gamma_tg(2), r(480));
        assert_eq!(gamma_tg(3), r(960));
    }

    #[test]
    fn unistrict_single_pair_distance_one() {
        // Both terminals lead singleton supernodes merging in stage 0, so
        // chi = (1 + 1) / (2 * 480) = 1/480.
        let inst = single_pair(1);
        let (table, _) = chi_unistrict(&inst, 2, &TieRule::Lex).unwrap();
        assert_eq!(table.shares[0], Rational::new(1, 480));
    }

    #[test]
    fn groupstrict_single_pair_distance_five() {
        // One merge in stage 2; both leaders belong to the same pair, which
        // receives both increments: 2 * 2^3 / 960 = 1/60.
        let inst = single_pair(5);
        let (table, _) = chi_groupstrict(&inst, 2, &TieRule::Lex).unwrap();
        assert_eq!(table.shares[0], Rational::new(1, 60));
    }

    #[test]
    fn symmetric_pairs_get_equal_shares() {
        // Two pairs that are mirror images under an isometry exchanging
        // them: a 4-cycle of side 3.
        let edges = vec![
            (0, 2, r(3)),
            (2, 1, r(3)),
            (1, 3, r(3)),
            (3, 0, r(3)),
        ];
        let inst = crate::instance::metric_from_edges(4, &edges, vec![(0, 1), (2, 3)]).unwrap();
        let (uni, _) = chi_unistrict(&inst, 2, &TieRule::Lex).unwrap();
        assert_eq!(uni.shares[0], uni.shares[1]);
        let (grp, _) = chi_groupstrict(&inst, 2, &TieRule::Lex).unwrap();
        assert_eq!(grp.shares[0], grp.shares[1]);
    }

    #[test]
    fn budget_balance_on_random_suite() {
        for seed in 0..20 {
            let inst = gen_random(1 + (seed as usize % 5), 10, 9100 + seed);
            let opt = steiner_forest_exact(&inst).unwrap().cost;
            let (uni, _) = chi_unistrict(&inst, 2, &TieRule::Lex).unwrap();
            assert!(uni.total() <= opt, "unistrict seed {seed}");
            let (grp, _) = chi_groupstrict(&inst, 2, &TieRule::Lex).unwrap();
            assert!(grp.total() <= opt, "groupstrict seed {seed}");
        }
    }

    #[test]
    fn provenance_sums_to_share() {
        let inst = gen_random(4, 10, 321);
        let (grp, _) = chi_groupstrict(&inst, 2, &TieRule::Lex).unwrap();
        for (k, share) in grp.shares.iter().enumerate() {
            let sum: Rational = grp.provenance[k].iter().map(|p| p.amount).sum();
            assert_eq!(sum, *share);
        }
    }

    #[test]
    fn verify_unistrict_solo_pair() {
        let inst = single_pair(5);
        let report = verify_unistrict(&inst, 0, 2, &TieRule::Lex).unwrap();
        assert!(report.passed(), "{:?}", report.failed_checks());
    }

    #[test]
    fn verify_unistrict_ladder_target_long_pair() {
        let inst = gen_ladder(3, Rational::new(1, 10)).unwrap();
        let report = verify_unistrict(&inst, 0, 2, &TieRule::Lex).unwrap();
        assert!(report.passed(), "{:?}", report.failed_checks());
    }

    #[test]
    fn verify_nesting_k1() {
        let inst = single_pair(4);
        let report = verify_nesting(&inst, 0, 2, &TieRule::Lex).unwrap();
        assert!(report.passed(), "{:?}", report.failed_checks());
    }

    #[test]
    fn verify_nesting_ladder() {
        let inst = gen_ladder(2, Rational::new(1, 10)).unwrap();
        let report = verify_nesting(&inst, 0, 2, &TieRule::Lex).unwrap();
        assert!(report.passed(), "{:?}", report.failed_checks());
    }

    #[test]
    fn verify_nesting_random_sweep() {
        for seed in 0..10 {
            let inst = gen_random(1 + (seed as usize % 4), 9, 9300 + seed);
            for target in 0..inst.num_pairs() {
                let report = verify_nesting(&inst, target, 2, &TieRule::Lex).unwrap();
                assert!(
                    report.passed(),
                    "seed {seed} target {target}: {:?}",
                    report.failed_checks()
                );
            }
        }
    }

    #[test]
    fn verify_groupstrict_empty_d2() {
        let inst = gen_random(3, 8, 55);
        let d1: Vec<usize> = (0..3).collect();
        let (cons, report) = verify_groupstrict(&inst, &d1, &[], 2, &TieRule::Lex).unwrap();
        assert!(report.passed(), "{:?}", report.failed_checks());
        assert!(cons.f2.is_empty(), "expected empty F2, got {:?}", cons.f2);
    }

    #[test]
    fn verify_groupstrict_single_d2_on_ladder() {
        let inst = gen_ladder(3, Rational::new(1, 10)).unwrap();
        // D2 = {(s, sbar)}, D1 = the rungs.
        let d1: Vec<usize> = (1..=3).collect();
        let (_, report) = verify_groupstrict(&inst, &d1, &[0], 2, &TieRule::Lex).unwrap();
        assert!(report.passed(), "{:?}", report.failed_checks());
    }

    #[test]
    fn verify_groupstrict_overlap_rejected() {
        let inst = gen_random(2, 6, 77);
        assert!(verify_groupstrict(&inst, &[0, 1], &[1], 2, &TieRule::Lex).is_err());
    }

    #[test]
    fn verify_groupstrict_random_bipartitions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for seed in 0..10 {
            let inst = gen_random(2 + (seed as usize % 4), 10, 9500 + seed);
            let mut d1 = Vec::new();
            let mut d2 = Vec::new();
            for k in 0..inst.num_pairs() {
                if rng.gen_bool(0.5) {
                    d1.push(k);
                } else {
                    d2.push(k);
                }
            }
            let (_, report) = verify_groupstrict(&inst, &d1, &d2, 2, &TieRule::Lex).unwrap();
            assert!(report.passed(), "seed {seed}: {:?}", report.failed_checks());
        }
    }
}
