//! Forests over instance vertices: the shared feasibility checker, widths,
//! tree-path distances, and the maximal-acyclic-subgraph extraction every
//! solver uses to turn its bought edge multiset into a forest.

use std::collections::{BTreeMap, BTreeSet};

use crate::instance::{Instance, VertexId};
use crate::rational::Rational;

/// Path-compressed union-find.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Returns false if the two were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] += 1;
        }
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// An undirected edge with its length in the instance metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub len: Rational,
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId, len: Rational) -> Self {
        Edge { u, v, len }
    }

    pub fn key(&self) -> (VertexId, VertexId) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

pub fn total_cost(edges: &[Edge]) -> Rational {
    edges.iter().map(|e| e.len).sum()
}

/// Scans `edges` in order and keeps each edge that does not close a cycle.
/// Preserves the connectivity of the input edge set.
pub fn maximal_acyclic(n: usize, edges: &[Edge]) -> Vec<Edge> {
    let mut uf = UnionFind::new(n);
    edges
        .iter()
        .filter(|e| uf.union(e.u, e.v))
        .copied()
        .collect()
}

pub fn is_acyclic(n: usize, edges: &[Edge]) -> bool {
    let mut uf = UnionFind::new(n);
    edges.iter().all(|e| uf.union(e.u, e.v))
}

/// The single feasibility checker shared by solvers, oracles and certifiers:
/// every demand pair must be connected by the edge set. Vertices at metric
/// distance zero count as identified (the normalization allows 0-distance
/// points).
pub fn is_feasible(inst: &Instance, edges: &[Edge]) -> bool {
    let n = inst.num_vertices();
    let mut uf = UnionFind::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if inst.dist(u, v).is_zero() {
                uf.union(u, v);
            }
        }
    }
    for e in edges {
        uf.union(e.u, e.v);
    }
    inst.demands().iter().all(|&(s, t)| uf.same(s, t))
}

/// Vertex sets of the connected components induced by `edges` (isolated
/// vertices are omitted), ordered by smallest member.
pub fn components(n: usize, edges: &[Edge]) -> Vec<BTreeSet<VertexId>> {
    let mut uf = UnionFind::new(n);
    let mut touched = BTreeSet::new();
    for e in edges {
        uf.union(e.u, e.v);
        touched.insert(e.u);
        touched.insert(e.v);
    }
    let mut groups: BTreeMap<usize, BTreeSet<VertexId>> = BTreeMap::new();
    for v in touched {
        groups.entry(uf.find(v)).or_default().insert(v);
    }
    let mut out: Vec<BTreeSet<VertexId>> = groups.into_values().collect();
    out.sort_by_key(|s| *s.iter().next().expect("nonempty"));
    out
}

/// Sum of edge lengths along the unique tree path, or `None` when `u` and
/// `v` are not connected by `edges` (which must be acyclic).
pub fn tree_path_len(edges: &[Edge], u: VertexId, v: VertexId) -> Option<Rational> {
    if u == v {
        return Some(Rational::ZERO);
    }
    let mut adj: BTreeMap<VertexId, Vec<(VertexId, Rational)>> = BTreeMap::new();
    for e in edges {
        adj.entry(e.u).or_default().push((e.v, e.len));
        adj.entry(e.v).or_default().push((e.u, e.len));
    }
    // DFS from u; tree structure means no revisits needed beyond the parent.
    let mut stack = vec![(u, usize::MAX, Rational::ZERO)];
    while let Some((x, parent, acc)) = stack.pop() {
        if x == v {
            return Some(acc);
        }
        if let Some(nbrs) = adj.get(&x) {
            for &(y, w) in nbrs {
                if y != parent {
                    stack.push((y, x, acc + w));
                }
            }
        }
    }
    None
}

/// Width of the tree containing `tree_vertices`: the maximum tree-path
/// distance over demand pairs fully contained in the tree. Pairs outside
/// contribute nothing; a tree with no complete pair has width 0.
pub fn tree_width(inst: &Instance, tree_edges: &[Edge], tree_vertices: &BTreeSet<VertexId>) -> Rational {
    let mut w = Rational::ZERO;
    for &(s, t) in inst.demands() {
        if tree_vertices.contains(&s) && tree_vertices.contains(&t) {
            if let Some(d) = tree_path_len(tree_edges, s, t) {
                w = w.max(d);
            }
        }
    }
    w
}

/// Sum of tree widths over the components of a forest.
pub fn forest_width(inst: &Instance, edges: &[Edge]) -> Rational {
    let comps = components(inst.num_vertices(), edges);
    comps
        .iter()
        .map(|comp| {
            let tree: Vec<Edge> = edges
                .iter()
                .filter(|e| comp.contains(&e.u))
                .copied()
                .collect();
            tree_width(inst, &tree, comp)
        })
        .sum()
}
