//! The named instance generators: the ladder family, the girth lower-bound
//! construction over built-in cubic graphs, and seeded random grid metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::graphs::CubicGraph;
use super::{metric_from_edges, Instance, VertexId};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("ladder requires N >= 1")]
    LadderEmpty,
    #[error("ladder requires eps > 0")]
    LadderEps,
    #[error("not cubic: vertex {0} has degree {1}")]
    NotCubic(usize, usize),
    #[error("base graph is disconnected")]
    Disconnected,
    #[error("recorded girth {recorded} does not match measured girth {measured}")]
    GirthMismatch { recorded: usize, measured: usize },
    #[error("spanning tree does not span the base graph")]
    BadSpanningTree,
}

/// Ladder instance of Figure-2 shape.
///
/// Vertices: `0 = s`, `1..=N` are `s_1..s_N`, `N+1..=2N` are `sbar_1..sbar_N`,
/// `2N+1 = sbar`. Rungs and rail segments have length 2; the two end segments
/// have length `2 + eps`. The metric is the shortest-path closure. Demands
/// are `(s, sbar)` followed by the rungs `(s_i, sbar_i)`.
pub fn gen_ladder(n: usize, eps: Rational) -> Result<Instance, GenError> {
    if n == 0 {
        return Err(GenError::LadderEmpty);
    }
    if eps <= Rational::ZERO {
        return Err(GenError::LadderEps);
    }
    let s = 0;
    let si = |i: usize| i; // 1-based
    let sbari = |i: usize| n + i;
    let sbar = 2 * n + 1;
    let two = Rational::from_int(2);
    let mut edges = Vec::new();
    edges.push((s, si(1), two + eps));
    edges.push((si(n), sbar, two + eps));
    for i in 1..=n {
        edges.push((si(i), sbari(i), two));
    }
    for i in 1..n {
        edges.push((si(i), si(i + 1), two));
        edges.push((sbari(i), sbari(i + 1), two));
    }
    let mut demands = vec![(s, sbar)];
    for i in 1..=n {
        demands.push((si(i), sbari(i)));
    }
    Ok(metric_from_edges(2 * n + 2, &edges, demands).expect("ladder is connected"))
}

/// Parameters for the girth lower-bound construction: a cubic base graph
/// with a recorded girth, a spanning tree, and the long-edge length `g/2`.
#[derive(Debug, Clone)]
pub struct GirthInstanceSpec {
    pub base: CubicGraph,
    pub spanning_tree: Vec<(usize, usize)>,
    pub long_edge_length: Rational,
}

impl GirthInstanceSpec {
    /// Spanning tree by DFS from vertex 0 (larger neighbors first) and
    /// long-edge length `girth/2`.
    pub fn from_builtin(base: CubicGraph) -> Result<Self, GenError> {
        let tree = dfs_spanning_tree(&base)?;
        let long = Rational::new(base.recorded_girth as i128, 2);
        Ok(GirthInstanceSpec {
            base,
            spanning_tree: tree,
            long_edge_length: long,
        })
    }

    /// Non-tree edges in ascending `(u,v)` order; their position in this list
    /// is the edge id used by the greedy matcher.
    pub fn non_tree_edges(&self) -> Vec<(usize, usize)> {
        let tree: std::collections::BTreeSet<_> = self
            .spanning_tree
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        let mut out: Vec<(usize, usize)> = self
            .base
            .edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .filter(|e| !tree.contains(e))
            .collect();
        out.sort_unstable();
        out
    }

    /// Greedy maximal matching over the non-tree edges, scanning ascending
    /// edge ids.
    pub fn demand_matching(&self) -> Vec<(usize, usize)> {
        let mut used = vec![false; self.base.n];
        let mut matching = Vec::new();
        for (u, v) in self.non_tree_edges() {
            if !used[u] && !used[v] {
                used[u] = true;
                used[v] = true;
                matching.push((u, v));
            }
        }
        matching
    }
}

fn dfs_spanning_tree(g: &CubicGraph) -> Result<Vec<(usize, usize)>, GenError> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.n];
    let mut tree = Vec::new();
    let mut stack = vec![(0usize, usize::MAX)];
    while let Some((u, parent)) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        if parent != usize::MAX {
            tree.push((parent, u));
        }
        // Push ascending so the stack explores larger neighbors first.
        for &v in &adj[u] {
            if !seen[v] {
                stack.push((v, u));
            }
        }
    }
    if seen.iter().all(|&s| s) {
        Ok(tree)
    } else {
        Err(GenError::Disconnected)
    }
}

/// Instance with tree edges of length 1 and non-tree edges of length `g/2`,
/// completed by shortest paths; demands are a greedy maximal matching over
/// the non-tree edges. The recorded girth is cross-checked by BFS.
pub fn gen_girth_lb(spec: &GirthInstanceSpec) -> Result<Instance, GenError> {
    let g = &spec.base;
    let adj = g.adjacency();
    for (v, nbrs) in adj.iter().enumerate() {
        if nbrs.len() != 3 {
            return Err(GenError::NotCubic(v, nbrs.len()));
        }
    }
    let measured = g.girth().ok_or(GenError::Disconnected)?;
    if measured != g.recorded_girth {
        return Err(GenError::GirthMismatch {
            recorded: g.recorded_girth,
            measured,
        });
    }
    let mut seen = vec![false; g.n];
    for &(u, v) in &spec.spanning_tree {
        seen[u] = true;
        seen[v] = true;
    }
    if spec.spanning_tree.len() != g.n - 1 || !seen.iter().all(|&s| s) {
        return Err(GenError::BadSpanningTree);
    }
    let mut edges = Vec::new();
    for &(u, v) in &spec.spanning_tree {
        edges.push((u, v, Rational::ONE));
    }
    for (u, v) in spec.non_tree_edges() {
        edges.push((u, v, spec.long_edge_length));
    }
    let demands = spec.demand_matching();
    metric_from_edges(g.n, &edges, demands).ok_or(GenError::Disconnected)
}

/// Hub-chain instance: hubs joined left to right by gaps of length
/// `60 + 2i`, one terminal per interior hub and two per end hub, every arm
/// of length 5, demand pairs nested across the chain. The optimal forest is
/// the single chain tree, the greedy merges sweep strictly rightward, and
/// the arm potentials sit far below every `delta/6` threshold — the shape
/// that separates highest-potential deletion from arbitrary deletion in the
/// candidate-forest replay.
pub fn gen_hub_chain(nhubs: usize) -> Result<Instance, GenError> {
    if nhubs < 2 || nhubs % 2 != 0 {
        return Err(GenError::LadderEmpty);
    }
    let terminals = nhubs + 2;
    let hub = |i: usize| terminals + i;
    let mid = |i: usize| terminals + nhubs + i;
    let mut edges = Vec::new();
    for i in 0..nhubs - 1 {
        let half = Rational::from_int(30 + i as i128);
        edges.push((hub(i), mid(i), half));
        edges.push((mid(i), hub(i + 1), half));
    }
    let hub_of = |t: usize| -> usize {
        if t <= 1 {
            hub(0)
        } else if t >= terminals - 2 {
            hub(nhubs - 1)
        } else {
            hub(t - 1)
        }
    };
    for t in 0..terminals {
        edges.push((t, hub_of(t), Rational::from_int(5)));
    }
    let demands = (0..terminals / 2)
        .map(|i| (i, terminals - 1 - i))
        .collect();
    Ok(metric_from_edges(terminals + 2 * nhubs - 1, &edges, demands)
        .expect("chain is connected"))
}

/// Seeded random instance: `2k` terminals among `n` distinct points of an
/// integer grid under the L1 metric (exact, triangle-valid, and at least 1
/// between distinct points). Extra points act as potential Steiner vertices.
pub fn gen_random(pairs: usize, n: usize, seed: u64) -> Instance {
    assert!(n >= 2 * pairs, "need at least 2 vertices per pair");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (3 * n).max(8) as i128;
    let mut points: Vec<(i128, i128)> = Vec::new();
    while points.len() < n {
        let p = (rng.gen_range(0..side), rng.gen_range(0..side));
        if !points.contains(&p) {
            points.push(p);
        }
    }
    let dist = points
        .iter()
        .map(|&(x1, y1)| {
            points
                .iter()
                .map(|&(x2, y2)| Rational::from_int((x1 - x2).abs() + (y1 - y2).abs()))
                .collect()
        })
        .collect();
    // Terminals are a random sample of the points, paired consecutively.
    let mut ids: Vec<VertexId> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        ids.swap(i, j);
    }
    let demands = (0..pairs).map(|k| (ids[2 * k], ids[2 * k + 1])).collect();
    Instance::from_parts(dist, demands)
}
