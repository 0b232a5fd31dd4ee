//! Clusterings of terminals into supernodes, activity policies, and the
//! punctured metric `d_{M/C}` obtained by zeroing intra-supernode distances.
//!
//! Activity is a strategy injected by the caller: the plain greedy uses the
//! mate policy (a supernode is active while some member's mate is outside),
//! the timed algorithms drive activity from leader levels and the current
//! stage. One clustering engine serves both.

use std::collections::{BTreeMap, BTreeSet};

use crate::forest::Edge;
use crate::instance::{Instance, VertexId};
use crate::rational::Rational;

pub type SupernodeId = usize;

/// Decides whether a supernode with the given members is active.
pub trait ActivityPolicy {
    fn is_active(&self, members: &BTreeSet<VertexId>) -> bool;
}

/// A terminal is active iff its supernode does not contain its mate; a
/// supernode is active iff it contains an active terminal.
pub struct MateActivity<'a> {
    pub inst: &'a Instance,
}

impl ActivityPolicy for MateActivity<'_> {
    fn is_active(&self, members: &BTreeSet<VertexId>) -> bool {
        members.iter().any(|&u| {
            self.inst
                .mate(u)
                .map_or(false, |m| !members.contains(&m))
        })
    }
}

/// Timed policy: active iff the highest member level reaches the current
/// stage. Levels are `ceil(log_c d(s, mate(s)))` in the original metric.
pub struct LevelActivity {
    pub levels: BTreeMap<VertexId, i64>,
    pub stage: i64,
}

impl LevelActivity {
    pub fn levels_for(inst: &Instance, base: u32) -> BTreeMap<VertexId, i64> {
        let mut levels = BTreeMap::new();
        for &(s, t) in inst.demands() {
            let d = inst.dist(s, t);
            // Distance-0 pairs are born connected and never become active.
            let level = d.ceil_log(base).unwrap_or(i64::MIN);
            levels.insert(s, level);
            levels.insert(t, level);
        }
        levels
    }
}

impl ActivityPolicy for LevelActivity {
    fn is_active(&self, members: &BTreeSet<VertexId>) -> bool {
        members
            .iter()
            .filter_map(|v| self.levels.get(v))
            .max()
            .map_or(false, |&lvl| lvl >= self.stage)
    }
}

/// A partition of the terminal set into supernodes with activity flags.
/// Supernode ids are assigned in creation order: the trivial clustering
/// numbers singletons in demand-list order, and every merge mints a new id.
#[derive(Debug, Clone)]
pub struct Clustering {
    members: BTreeMap<SupernodeId, BTreeSet<VertexId>>,
    active: BTreeMap<SupernodeId, bool>,
    generation: u64,
    next_id: SupernodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusteringError {
    #[error("supernode {0} is not present")]
    Absent(SupernodeId),
    #[error("cannot merge a supernode with itself")]
    SelfMerge,
}

impl Clustering {
    /// Every terminal in its own singleton supernode.
    pub fn trivial(inst: &Instance, policy: &dyn ActivityPolicy) -> Self {
        let mut members = BTreeMap::new();
        let mut active = BTreeMap::new();
        for (id, &t) in inst.terminals().iter().enumerate() {
            let set: BTreeSet<_> = [t].into_iter().collect();
            active.insert(id, policy.is_active(&set));
            members.insert(id, set);
        }
        let next_id = members.len();
        Clustering {
            members,
            active,
            generation: 0,
            next_id,
        }
    }

    /// Clustering from explicit vertex groups (ids in list order). Groups
    /// may contain non-terminal vertices; activity is computed by `policy`.
    pub fn from_groups(groups: Vec<BTreeSet<VertexId>>, policy: &dyn ActivityPolicy) -> Self {
        let mut members = BTreeMap::new();
        let mut active = BTreeMap::new();
        for (id, set) in groups.into_iter().enumerate() {
            active.insert(id, policy.is_active(&set));
            members.insert(id, set);
        }
        let next_id = members.len();
        Clustering {
            members,
            active,
            generation: 0,
            next_id,
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn ids(&self) -> impl Iterator<Item = SupernodeId> + '_ {
        self.members.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self, id: SupernodeId) -> Option<&BTreeSet<VertexId>> {
        self.members.get(&id)
    }

    pub fn is_active(&self, id: SupernodeId) -> bool {
        self.active.get(&id).copied().unwrap_or(false)
    }

    pub fn active_ids(&self) -> Vec<SupernodeId> {
        self.members
            .keys()
            .copied()
            .filter(|id| self.is_active(*id))
            .collect()
    }

    pub fn supernode_of(&self, v: VertexId) -> Option<SupernodeId> {
        self.members
            .iter()
            .find(|(_, set)| set.contains(&v))
            .map(|(&id, _)| id)
    }

    /// Merges two supernodes (plus optional absorbed ones, for the
    /// path-contraction variant) into a freshly numbered supernode whose
    /// activity is recomputed under `policy`. Returns the new id.
    pub fn merge(
        &mut self,
        s1: SupernodeId,
        s2: SupernodeId,
        absorbed: &[SupernodeId],
        policy: &dyn ActivityPolicy,
    ) -> Result<SupernodeId, ClusteringError> {
        if s1 == s2 {
            return Err(ClusteringError::SelfMerge);
        }
        for id in [s1, s2].iter().chain(absorbed.iter()) {
            if !self.members.contains_key(id) {
                return Err(ClusteringError::Absent(*id));
            }
        }
        let mut union = BTreeSet::new();
        for id in [s1, s2].iter().chain(absorbed.iter()) {
            union.extend(self.members.remove(id).expect("checked present"));
            self.active.remove(id);
        }
        let id = self.next_id;
        self.next_id += 1;
        self.active.insert(id, policy.is_active(&union));
        self.members.insert(id, union);
        self.generation += 1;
        Ok(id)
    }

    /// Extends an existing supernode with extra vertices (path-contraction
    /// absorbs non-terminal path vertices this way).
    pub fn absorb_vertices(&mut self, id: SupernodeId, vs: &[VertexId]) -> Result<(), ClusteringError> {
        let set = self.members.get_mut(&id).ok_or(ClusteringError::Absent(id))?;
        set.extend(vs.iter().copied());
        self.generation += 1;
        Ok(())
    }

    /// Re-evaluates every activity flag (used at stage boundaries of the
    /// timed algorithms). Does not touch the member structure.
    pub fn refresh_activity(&mut self, policy: &dyn ActivityPolicy) {
        for (id, set) in &self.members {
            self.active.insert(*id, policy.is_active(set));
        }
    }

    /// Snapshot of member sets keyed by id.
    pub fn snapshot(&self) -> Vec<(SupernodeId, BTreeSet<VertexId>)> {
        self.members.iter().map(|(&id, set)| (id, set.clone())).collect()
    }
}

const NO_VIA: usize = usize::MAX;

/// All-pairs punctured distances for one clustering generation, over the
/// quotient whose nodes are supernodes plus unclustered vertices. Rebuilt
/// lazily when the generation counter moves.
#[derive(Debug, Clone)]
pub struct PuncturedMetric {
    generation: u64,
    node_of_vertex: Vec<usize>,
    node_vertices: Vec<Vec<VertexId>>,
    dist: Vec<Vec<Rational>>,
    via: Vec<Vec<usize>>,
    node_of_supernode: BTreeMap<SupernodeId, usize>,
    reachable: Vec<Vec<bool>>,
}

impl PuncturedMetric {
    pub fn build(inst: &Instance, cl: &Clustering) -> Self {
        let n = inst.num_vertices();
        let mut node_of_vertex = vec![NO_VIA; n];
        let mut node_vertices: Vec<Vec<VertexId>> = Vec::new();
        let mut node_of_supernode = BTreeMap::new();
        for id in cl.ids() {
            let node = node_vertices.len();
            let set = cl.members(id).expect("live id");
            for &v in set {
                node_of_vertex[v] = node;
            }
            node_vertices.push(set.iter().copied().collect());
            node_of_supernode.insert(id, node);
        }
        for v in 0..n {
            if node_of_vertex[v] == NO_VIA {
                let node = node_vertices.len();
                node_of_vertex[v] = node;
                node_vertices.push(vec![v]);
            }
        }
        let q = node_vertices.len();
        // Inter-node weight: min over member pairs; sentinel for "no edge"
        // is handled via the reachable matrix (distances are all finite in a
        // complete metric, so every pair is reachable, but keep it robust).
        let mut dist = vec![vec![Rational::ZERO; q]; q];
        let mut reachable = vec![vec![true; q]; q];
        for a in 0..q {
            for b in 0..q {
                if a == b {
                    continue;
                }
                let mut best: Option<Rational> = None;
                for &u in &node_vertices[a] {
                    for &v in &node_vertices[b] {
                        let d = inst.dist(u, v);
                        best = Some(best.map_or(d, |x| x.min(d)));
                    }
                }
                match best {
                    Some(d) => dist[a][b] = d,
                    None => reachable[a][b] = false,
                }
            }
        }
        let mut via = vec![vec![NO_VIA; q]; q];
        for k in 0..q {
            for i in 0..q {
                if !reachable[i][k] {
                    continue;
                }
                for j in 0..q {
                    if !reachable[k][j] {
                        continue;
                    }
                    let cand = dist[i][k] + dist[k][j];
                    if !reachable[i][j] || cand < dist[i][j] {
                        dist[i][j] = cand;
                        reachable[i][j] = true;
                        via[i][j] = k;
                    }
                }
            }
        }
        PuncturedMetric {
            generation: cl.generation(),
            node_of_vertex,
            node_vertices,
            dist,
            via,
            node_of_supernode,
            reachable,
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// `d_{M/C}(u, v)`; zero when the two share a supernode.
    pub fn distance(&self, u: VertexId, v: VertexId) -> Rational {
        self.dist[self.node_of_vertex[u]][self.node_of_vertex[v]]
    }

    /// Punctured distance between two supernodes. The degenerate `S1 == S2`
    /// case is 0 and flagged.
    pub fn supernode_distance(&self, s1: SupernodeId, s2: SupernodeId) -> (Rational, bool) {
        let a = self.node_of_supernode[&s1];
        let b = self.node_of_supernode[&s2];
        if a == b {
            return (Rational::ZERO, true);
        }
        (self.dist[a][b], false)
    }

    fn node_path(&self, a: usize, b: usize, out: &mut Vec<usize>) {
        let k = self.via[a][b];
        if k == NO_VIA {
            out.push(b);
        } else {
            self.node_path(a, k, out);
            self.node_path(k, b, out);
        }
    }

    /// Witnessing shortest path between two supernodes: the inter-node edges
    /// realized at vertex level (each of length `d_M`), plus the alternating
    /// vertex sequence entering and leaving each intermediate node.
    pub fn supernode_path(
        &self,
        inst: &Instance,
        s1: SupernodeId,
        s2: SupernodeId,
    ) -> (Rational, Vec<Edge>, Vec<VertexId>) {
        let a = self.node_of_supernode[&s1];
        let b = self.node_of_supernode[&s2];
        if a == b || !self.reachable[a][b] {
            return (Rational::ZERO, Vec::new(), Vec::new());
        }
        let mut nodes = vec![a];
        self.node_path(a, b, &mut nodes);
        let mut edges = Vec::new();
        let mut seq = Vec::new();
        for w in nodes.windows(2) {
            let (x, y) = (w[0], w[1]);
            let (u, v) = self.realize_hop(inst, x, y);
            seq.push(u);
            seq.push(v);
            edges.push(Edge::new(u, v, inst.dist(u, v)));
        }
        (self.dist[a][b], edges, seq)
    }

    /// Lexicographically smallest vertex pair realizing the min inter-node
    /// distance.
    fn realize_hop(&self, inst: &Instance, a: usize, b: usize) -> (VertexId, VertexId) {
        let mut best: Option<(Rational, VertexId, VertexId)> = None;
        for &u in &self.node_vertices[a] {
            for &v in &self.node_vertices[b] {
                let d = inst.dist(u, v);
                let better = match &best {
                    None => true,
                    Some((bd, bu, bv)) => d < *bd || (d == *bd && (u, v) < (*bu, *bv)),
                };
                if better {
                    best = Some((d, u, v));
                }
            }
        }
        let (_, u, v) = best.expect("nonempty nodes");
        (u, v)
    }

    /// Distance from an active supernode to its nearest other active
    /// supernode, if any. Used for the closest-active monotonicity checks.
    pub fn nearest_active_distance(&self, cl: &Clustering, id: SupernodeId) -> Option<Rational> {
        cl.active_ids()
            .into_iter()
            .filter(|&other| other != id)
            .map(|other| self.supernode_distance(id, other).0)
            .min()
    }
}

/// Rebuilds the cache only when the clustering generation moved.
pub fn refreshed<'a>(
    cache: &'a mut Option<PuncturedMetric>,
    inst: &Instance,
    cl: &Clustering,
) -> &'a PuncturedMetric {
    let stale = cache
        .as_ref()
        .map_or(true, |pm| pm.generation() != cl.generation());
    if stale {
        *cache = Some(PuncturedMetric::build(inst, cl));
    }
    cache.as_ref().expect("just built")
}
