//! The greedy Steiner forest solvers: gluttonous merging, its timed variant
//! (in both the iteration and the stage/auxiliary-graph formulation), the
//! path-contraction variant, and the classical paired greedy.

use std::collections::{BTreeMap, BTreeSet};

use crate::clustering::{
    refreshed, Clustering, LevelActivity, MateActivity, PuncturedMetric,
    SupernodeId,
};
use crate::forest::{self, Edge};
use crate::instance::{Instance, VertexId};
use crate::rational::{int_pow, Rational};
use crate::trace::{AlgorithmTag, MergeEvent, RunTrace, StagePair, StageRecord};

/// Tie rule for choosing among equally close supernode pairs. Pairs are
/// compared as `(min key, max key)`; the default keys supernode ids by
/// creation order, the permuted rule remaps the initial singleton ids for
/// adversarial testing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TieRule {
    Lex,
    Permuted(Vec<usize>),
}

impl TieRule {
    fn key(&self, id: SupernodeId) -> usize {
        match self {
            TieRule::Lex => id,
            TieRule::Permuted(p) => p.get(id).copied().unwrap_or(id),
        }
    }

    pub fn pair_key(&self, a: SupernodeId, b: SupernodeId) -> (usize, usize) {
        let (x, y) = (self.key(a), self.key(b));
        (x.min(y), x.max(y))
    }

    pub fn name(&self) -> String {
        match self {
            TieRule::Lex => "lex".to_owned(),
            TieRule::Permuted(_) => "permuted".to_owned(),
        }
    }
}

/// Minimum-distance active pair under the tie rule.
fn min_active_pair(
    pm: &PuncturedMetric,
    cl: &Clustering,
    tie: &TieRule,
) -> Option<(SupernodeId, SupernodeId, Rational)> {
    let active = cl.active_ids();
    let mut best: Option<(Rational, (usize, usize), SupernodeId, SupernodeId)> = None;
    for (i, &a) in active.iter().enumerate() {
        for &b in &active[i + 1..] {
            let (d, _) = pm.supernode_distance(a, b);
            let key = tie.pair_key(a, b);
            let better = match &best {
                None => true,
                Some((bd, bk, _, _)) => d < *bd || (d == *bd && key < *bk),
            };
            if better {
                best = Some((d, key, a, b));
            }
        }
    }
    best.map(|(d, _, a, b)| (a, b, d))
}

/// The gluttonous algorithm: repeatedly merge the two closest active
/// supernodes in the punctured metric, buying the witnessing shortest path.
pub fn gluttonous(inst: &Instance, tie: &TieRule) -> RunTrace {
    let policy = MateActivity { inst };
    let mut cl = Clustering::trivial(inst, &policy);
    let mut cache: Option<PuncturedMetric> = None;
    let mut events = Vec::new();
    let mut bought_all: Vec<Edge> = Vec::new();
    let mut iteration = 1;
    loop {
        let pm = refreshed(&mut cache, inst, &cl);
        let Some((s1, s2, _)) = min_active_pair(pm, &cl, tie) else {
            break;
        };
        let (delta, bought, _) = pm.supernode_path(inst, s1, s2);
        let merged_into = cl.merge(s1, s2, &[], &policy).expect("live supernodes");
        bought_all.extend(bought.iter().copied());
        events.push(MergeEvent {
            iteration,
            stage: -1,
            s1,
            s2,
            absorbed: Vec::new(),
            merged_into,
            delta,
            bought,
        });
        iteration += 1;
    }
    finish_trace(inst, AlgorithmTag::Gluttonous, tie, None, events, Vec::new(), cl, bought_all)
}

fn finish_trace(
    inst: &Instance,
    algorithm: AlgorithmTag,
    tie: &TieRule,
    base_c: Option<u32>,
    events: Vec<MergeEvent>,
    stages: Vec<StageRecord>,
    cl: Clustering,
    bought_all: Vec<Edge>,
) -> RunTrace {
    let forest = forest::maximal_acyclic(inst.num_vertices(), &bought_all);
    let total_cost = forest::total_cost(&forest);
    RunTrace {
        algorithm,
        tie_rule: tie.name(),
        base_c,
        events,
        stages,
        final_clustering: cl.snapshot(),
        forest,
        total_cost,
    }
}

/// Leader of a supernode: the member terminal whose distance to its mate is
/// largest, ties broken by smallest terminal index (demand-list position).
pub fn leader(inst: &Instance, members: &BTreeSet<VertexId>) -> Option<VertexId> {
    let mut ranked: Vec<(VertexId, usize)> = members
        .iter()
        .filter_map(|&v| inst.terminal_index(v).map(|ix| (v, ix)))
        .collect();
    ranked.sort_by_key(|&(_, ix)| ix);
    let mut best: Option<(Rational, VertexId)> = None;
    for (v, _) in ranked {
        let d = inst.dist(v, inst.mate(v).expect("terminal"));
        if best.as_ref().map_or(true, |&(bd, _)| d > bd) {
            best = Some((d, v));
        }
    }
    best.map(|(_, v)| v)
}

/// Timed gluttonous in the stage formulation: per stage `i`, build the
/// auxiliary graph over active supernodes at punctured distance below
/// `c^{i+1}`, select a maximal acyclic pair set (scanned in ascending
/// (distance, tie) order), and apply the merges at stage end in ascending
/// (current distance, tie) order.
pub fn timed_gluttonous(inst: &Instance, c: u32, tie: &TieRule) -> Result<RunTrace, TimedError> {
    timed_stage_form(inst, c, tie)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimedError {
    #[error("base constant c must be at least 2, got {0}")]
    BadBase(u32),
}

pub fn timed_stage_form(inst: &Instance, c: u32, tie: &TieRule) -> Result<RunTrace, TimedError> {
    if c < 2 {
        return Err(TimedError::BadBase(c));
    }
    let levels = LevelActivity::levels_for(inst, c);
    let max_level = levels.values().copied().filter(|&l| l > i64::MIN).max();
    let mut policy = LevelActivity { levels, stage: 0 };
    let mut cl = Clustering::trivial(inst, &policy);
    let mut cache: Option<PuncturedMetric> = None;
    let mut events = Vec::new();
    let mut stages = Vec::new();
    let mut bought_all: Vec<Edge> = Vec::new();
    let mut iteration = 1;
    let Some(max_level) = max_level else {
        // Every pair is at distance zero; nothing ever activates.
        return Ok(finish_trace(
            inst,
            AlgorithmTag::TimedGluttonous,
            tie,
            Some(c),
            events,
            stages,
            cl,
            bought_all,
        ));
    };
    for stage in 0..=max_level {
        policy.stage = stage;
        cl.refresh_activity(&policy);
        let threshold = int_pow(c, stage + 1);
        // Stage-start snapshot for pair endpoints and leaders.
        let start_members: BTreeMap<SupernodeId, BTreeSet<VertexId>> =
            cl.snapshot().into_iter().collect();
        let pm = PuncturedMetric::build(inst, &cl);
        let active = cl.active_ids();
        let mut candidates: Vec<(Rational, (usize, usize), SupernodeId, SupernodeId)> = Vec::new();
        for (i, &a) in active.iter().enumerate() {
            for &b in &active[i + 1..] {
                let (d, _) = pm.supernode_distance(a, b);
                if d < threshold {
                    candidates.push((d, tie.pair_key(a, b), a, b));
                }
            }
        }
        candidates.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        // Maximal acyclic pair set over the stage-start supernodes.
        let ids: Vec<SupernodeId> = start_members.keys().copied().collect();
        let index: BTreeMap<SupernodeId, usize> =
            ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut uf = forest::UnionFind::new(ids.len());
        let mut pending: Vec<(SupernodeId, SupernodeId)> = Vec::new();
        for (_, _, a, b) in &candidates {
            if uf.union(index[a], index[b]) {
                pending.push((*a, *b));
            }
        }
        // Apply at stage end, closest current pair first; `current` maps a
        // stage-start supernode to the supernode now containing it.
        let mut current: BTreeMap<SupernodeId, SupernodeId> =
            ids.iter().map(|&id| (id, id)).collect();
        let mut pairs = Vec::new();
        while !pending.is_empty() {
            let pm = refreshed(&mut cache, inst, &cl);
            let mut best: Option<(Rational, (usize, usize), usize)> = None;
            for (k, &(a, b)) in pending.iter().enumerate() {
                let (ca, cb) = (current[&a], current[&b]);
                let (d, degenerate) = pm.supernode_distance(ca, cb);
                assert!(!degenerate, "pending pair already merged");
                let key = tie.pair_key(ca, cb);
                let better = match &best {
                    None => true,
                    Some((bd, bk, _)) => d < *bd || (d == *bd && key < *bk),
                };
                if better {
                    best = Some((d, key, k));
                }
            }
            let (_, _, k) = best.expect("pending nonempty");
            let (a, b) = pending.remove(k);
            let (ca, cb) = (current[&a].min(current[&b]), current[&a].max(current[&b]));
            let (delta, bought, _) = pm.supernode_path(inst, ca, cb);
            let merged_into = cl.merge(ca, cb, &[], &policy).expect("live supernodes");
            for v in current.values_mut() {
                if *v == ca || *v == cb {
                    *v = merged_into;
                }
            }
            bought_all.extend(bought.iter().copied());
            events.push(MergeEvent {
                iteration,
                stage,
                s1: ca,
                s2: cb,
                absorbed: Vec::new(),
                merged_into,
                delta,
                bought: bought.clone(),
            });
            pairs.push(StagePair {
                s1: a,
                s2: b,
                leader1: leader(inst, &start_members[&a]).expect("terminal supernode"),
                leader2: leader(inst, &start_members[&b]).expect("terminal supernode"),
                applied_delta: delta,
                bought,
            });
            iteration += 1;
        }
        stages.push(StageRecord { stage, pairs });
    }
    Ok(finish_trace(
        inst,
        AlgorithmTag::TimedGluttonous,
        tie,
        Some(c),
        events,
        stages,
        cl,
        bought_all,
    ))
}

/// Timed gluttonous in the iteration formulation: merge the closest pair of
/// active supernodes while it is below the stage threshold, advancing the
/// stage (and re-evaluating activity) when no such pair remains. Kept as a
/// differential-testing twin of [`timed_stage_form`].
pub fn timed_iteration_form(inst: &Instance, c: u32, tie: &TieRule) -> Result<RunTrace, TimedError> {
    if c < 2 {
        return Err(TimedError::BadBase(c));
    }
    let levels = LevelActivity::levels_for(inst, c);
    let max_level = levels.values().copied().filter(|&l| l > i64::MIN).max();
    let mut policy = LevelActivity { levels, stage: 0 };
    let mut cl = Clustering::trivial(inst, &policy);
    let mut cache: Option<PuncturedMetric> = None;
    let mut events = Vec::new();
    let mut bought_all: Vec<Edge> = Vec::new();
    let mut iteration = 1;
    if let Some(max_level) = max_level {
        let mut stage = 0;
        cl.refresh_activity(&policy);
        loop {
            let threshold = int_pow(c, stage + 1);
            let pm = refreshed(&mut cache, inst, &cl);
            let next = min_active_pair(pm, &cl, tie).filter(|&(_, _, d)| d < threshold);
            match next {
                Some((s1, s2, _)) => {
                    let (delta, bought, _) = pm.supernode_path(inst, s1, s2);
                    let merged_into = cl.merge(s1, s2, &[], &policy).expect("live supernodes");
                    bought_all.extend(bought.iter().copied());
                    events.push(MergeEvent {
                        iteration,
                        stage,
                        s1,
                        s2,
                        absorbed: Vec::new(),
                        merged_into,
                        delta,
                        bought,
                    });
                    iteration += 1;
                }
                None => {
                    if stage >= max_level {
                        break;
                    }
                    stage += 1;
                    policy.stage = stage;
                    cl.refresh_activity(&policy);
                }
            }
        }
    }
    Ok(finish_trace(
        inst,
        AlgorithmTag::TimedGluttonousIteration,
        tie,
        Some(c),
        events,
        Vec::new(),
        cl,
        bought_all,
    ))
}

/// Path-contraction gluttonous: merge the two closest active supernodes and
/// contract the whole witnessing shortest path, absorbing the inactive
/// supernodes and non-terminal vertices that lie on it.
pub fn gluttonous_contract(inst: &Instance, tie: &TieRule) -> RunTrace {
    let policy = MateActivity { inst };
    let mut cl = Clustering::trivial(inst, &policy);
    let mut cache: Option<PuncturedMetric> = None;
    let mut events = Vec::new();
    let mut bought_all: Vec<Edge> = Vec::new();
    let mut iteration = 1;
    loop {
        let pm = refreshed(&mut cache, inst, &cl);
        let Some((s1, s2, _)) = min_active_pair(pm, &cl, tie) else {
            break;
        };
        let (delta, bought, seq) = pm.supernode_path(inst, s1, s2);
        // Interior path vertices sit in inactive supernodes (by minimality of
        // the merging distance) or are bare non-terminals; contract them all.
        let mut absorbed: Vec<SupernodeId> = Vec::new();
        let mut absorbed_vertices: Vec<VertexId> = Vec::new();
        if seq.len() > 2 {
            for &v in &seq[1..seq.len() - 1] {
                match cl.supernode_of(v) {
                    Some(id) => {
                        if id != s1 && id != s2 && !absorbed.contains(&id) {
                            absorbed.push(id);
                        }
                    }
                    None => {
                        if !absorbed_vertices.contains(&v) {
                            absorbed_vertices.push(v);
                        }
                    }
                }
            }
        }
        let merged_into = cl
            .merge(s1, s2, &absorbed, &policy)
            .expect("live supernodes");
        cl.absorb_vertices(merged_into, &absorbed_vertices)
            .expect("fresh supernode");
        bought_all.extend(bought.iter().copied());
        events.push(MergeEvent {
            iteration,
            stage: -1,
            s1,
            s2,
            absorbed,
            merged_into,
            delta,
            bought,
        });
        iteration += 1;
    }
    finish_trace(
        inst,
        AlgorithmTag::GluttonousContract,
        tie,
        None,
        events,
        Vec::new(),
        cl,
        bought_all,
    )
}

/// Paired greedy: repeatedly connect the closest yet-unconnected demand pair
/// by a shortest path in the current graph, then zero out the bought edges.
pub fn paired_greedy(inst: &Instance) -> RunTrace {
    let n = inst.num_vertices();
    let mut bought: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut bought_edges: Vec<Edge> = Vec::new();
    let mut uf = forest::UnionFind::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if inst.dist(u, v).is_zero() {
                uf.union(u, v);
            }
        }
    }
    let weight = |bought: &BTreeSet<(VertexId, VertexId)>, u: VertexId, v: VertexId| {
        if bought.contains(&(u.min(v), u.max(v))) {
            Rational::ZERO
        } else {
            inst.dist(u, v)
        }
    };
    let mut events = Vec::new();
    let mut iteration = 1;
    loop {
        let mut pendings: Vec<(usize, VertexId, VertexId)> = Vec::new();
        for (k, &(s, t)) in inst.demands().iter().enumerate() {
            if !uf.same(s, t) {
                pendings.push((k, s, t));
            }
        }
        if pendings.is_empty() {
            break;
        }
        // Dijkstra from each pending source under the zeroed weights.
        let mut best: Option<(Rational, usize, Vec<VertexId>)> = None;
        for &(k, s, t) in &pendings {
            let (d, path) = dijkstra_path(n, s, t, |u, v| weight(&bought, u, v));
            if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
                best = Some((d, k, path));
            }
        }
        let (delta, k, path) = best.expect("pending pair exists");
        let (s, t) = inst.demands()[k];
        let mut new_edges = Vec::new();
        for w in path.windows(2) {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            uf.union(w[0], w[1]);
            if bought.insert(key) && !inst.dist(w[0], w[1]).is_zero() {
                let e = Edge::new(key.0, key.1, inst.dist(key.0, key.1));
                new_edges.push(e);
                bought_edges.push(e);
            }
        }
        events.push(MergeEvent {
            iteration,
            stage: -1,
            s1: 2 * k,
            s2: 2 * k + 1,
            absorbed: Vec::new(),
            merged_into: 2 * inst.num_pairs() + iteration,
            delta,
            bought: new_edges,
        });
        let _ = (s, t);
        iteration += 1;
    }
    let forest = forest::maximal_acyclic(n, &bought_edges);
    let total_cost = forest::total_cost(&forest);
    let final_clustering = forest::components(n, &forest)
        .into_iter()
        .enumerate()
        .map(|(i, comp)| {
            let terminals: BTreeSet<VertexId> =
                comp.into_iter().filter(|&v| inst.is_terminal(v)).collect();
            (i, terminals)
        })
        .collect();
    RunTrace {
        algorithm: AlgorithmTag::PairedGreedy,
        tie_rule: "pair-index".to_owned(),
        base_c: None,
        events,
        stages: Vec::new(),
        final_clustering,
        forest,
        total_cost,
    }
}

/// Deterministic Dijkstra over the complete graph with the given weight
/// function; returns the distance and one shortest vertex path.
fn dijkstra_path(
    n: usize,
    source: VertexId,
    target: VertexId,
    weight: impl Fn(VertexId, VertexId) -> Rational,
) -> (Rational, Vec<VertexId>) {
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut prev: Vec<usize> = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[source] = Some(Rational::ZERO);
    loop {
        let mut u: Option<usize> = None;
        for v in 0..n {
            if !done[v] && dist[v].is_some() {
                if u.map_or(true, |best| dist[v].unwrap() < dist[best].unwrap()) {
                    u = Some(v);
                }
            }
        }
        let Some(u) = u else { break };
        if u == target {
            break;
        }
        done[u] = true;
        let du = dist[u].unwrap();
        for v in 0..n {
            if v == u || done[v] {
                continue;
            }
            let cand = du + weight(u, v);
            if dist[v].map_or(true, |dv| cand < dv) {
                dist[v] = Some(cand);
                prev[v] = u;
            }
        }
    }
    let mut path = vec![target];
    let mut cur = target;
    while cur != source {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    (dist[target].expect("complete graph is connected"), path)
}
