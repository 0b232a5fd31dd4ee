//! Projected clusterings: for each tree of a reference forest, a refinement
//! of the supernode slices in which active pieces merge only when the
//! algorithm merges two supernodes whose slices are both active. Supplies
//! the per-tree minimum active distances used by the accounting certifiers.

use std::collections::{BTreeMap, BTreeSet};

use crate::forest::{self, Edge};
use crate::instance::{Instance, VertexId};
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub(crate) struct TreeProjection {
    /// Vertex set of the reference tree.
    pub vertices: BTreeSet<VertexId>,
    pub cost: Rational,
    group_of: BTreeMap<VertexId, usize>,
    groups: BTreeMap<usize, BTreeSet<VertexId>>,
    next_group: usize,
}

impl TreeProjection {
    fn new(tree_edges: &[Edge], inst: &Instance) -> Self {
        let vertices: BTreeSet<VertexId> = tree_edges.iter().flat_map(|e| [e.u, e.v]).collect();
        let mut group_of = BTreeMap::new();
        let mut groups = BTreeMap::new();
        let mut next_group = 0;
        for &v in &vertices {
            if inst.is_terminal(v) {
                group_of.insert(v, next_group);
                groups.insert(next_group, [v].into_iter().collect());
                next_group += 1;
            }
        }
        TreeProjection {
            vertices,
            cost: forest::total_cost(tree_edges),
            group_of,
            groups,
            next_group,
        }
    }

    pub fn slice_of(&self, set: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
        set.intersection(&self.vertices).copied().collect()
    }

    /// A slice is active when some member's mate lies outside the slice.
    pub fn slice_active(&self, inst: &Instance, set: &BTreeSet<VertexId>) -> bool {
        let slice = self.slice_of(set);
        slice
            .iter()
            .any(|&u| inst.mate(u).map_or(false, |m| !slice.contains(&m)))
    }

    fn group_active(&self, inst: &Instance, gid: usize) -> bool {
        let g = &self.groups[&gid];
        g.iter()
            .any(|&u| inst.mate(u).map_or(false, |m| !g.contains(&m)))
    }

    /// Active groups whose members lie in `slice`.
    pub fn active_groups_in(&self, inst: &Instance, slice: &BTreeSet<VertexId>) -> Vec<usize> {
        let mut ids: Vec<usize> = slice
            .iter()
            .filter_map(|v| self.group_of.get(v).copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.retain(|&g| self.group_active(inst, g));
        ids
    }

    pub fn merge_groups(&mut self, g1: usize, g2: usize) {
        let a = self.groups.remove(&g1).expect("live group");
        let b = self.groups.remove(&g2).expect("live group");
        let id = self.next_group;
        self.next_group += 1;
        let mut union = a;
        union.extend(b);
        for &v in &union {
            self.group_of.insert(v, id);
        }
        self.groups.insert(id, union);
    }

    /// Minimum punctured distance between two active groups, measured in
    /// the metric restricted to the tree's vertex set with every group
    /// contracted. `None` when fewer than two groups are active.
    pub fn delta(&self, inst: &Instance) -> Option<Rational> {
        let verts: Vec<VertexId> = self.vertices.iter().copied().collect();
        // Quotient nodes: groups (in id order), then unclustered vertices.
        let mut node_of: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut node_count = 0;
        let group_ids: Vec<usize> = self.groups.keys().copied().collect();
        for gid in &group_ids {
            for &v in &self.groups[gid] {
                node_of.insert(v, node_count);
            }
            node_count += 1;
        }
        for &v in &verts {
            if !node_of.contains_key(&v) {
                node_of.insert(v, node_count);
                node_count += 1;
            }
        }
        let q = node_count;
        let mut dist: Vec<Vec<Option<Rational>>> = vec![vec![None; q]; q];
        for i in 0..q {
            dist[i][i] = Some(Rational::ZERO);
        }
        for &u in &verts {
            for &v in &verts {
                let (a, b) = (node_of[&u], node_of[&v]);
                if a != b {
                    let d = inst.dist(u, v);
                    if dist[a][b].map_or(true, |cur| d < cur) {
                        dist[a][b] = Some(d);
                    }
                }
            }
        }
        for k in 0..q {
            for i in 0..q {
                let Some(dik) = dist[i][k] else { continue };
                for j in 0..q {
                    let Some(dkj) = dist[k][j] else { continue };
                    let cand = dik + dkj;
                    if dist[i][j].map_or(true, |cur| cand < cur) {
                        dist[i][j] = Some(cand);
                    }
                }
            }
        }
        let active: Vec<usize> = group_ids
            .iter()
            .enumerate()
            .filter(|(_, &gid)| self.group_active(inst, gid))
            .map(|(node, _)| node)
            .collect();
        if active.len() < 2 {
            return None;
        }
        let mut best: Option<Rational> = None;
        for (i, &a) in active.iter().enumerate() {
            for &b in &active[i + 1..] {
                if let Some(d) = dist[a][b] {
                    best = Some(best.map_or(d, |x| x.min(d)));
                }
            }
        }
        best
    }
}

/// One projection per tree of the reference forest.
#[derive(Debug, Clone)]
pub(crate) struct Projections {
    pub trees: Vec<TreeProjection>,
}

impl Projections {
    pub fn new(inst: &Instance, fstar: &[Edge]) -> Self {
        let comps = forest::components(inst.num_vertices(), fstar);
        let trees = comps
            .iter()
            .map(|comp| {
                let edges: Vec<Edge> = fstar
                    .iter()
                    .filter(|e| comp.contains(&e.u))
                    .copied()
                    .collect();
                TreeProjection::new(&edges, inst)
            })
            .collect();
        Projections { trees }
    }

    /// Tree indices whose slice of `set` is active.
    pub fn alive(&self, inst: &Instance, set: &BTreeSet<VertexId>) -> BTreeSet<usize> {
        self.trees
            .iter()
            .enumerate()
            .filter(|(_, p)| p.slice_active(inst, set))
            .map(|(r, _)| r)
            .collect()
    }

    /// All per-tree deltas at the current state.
    pub fn deltas(&self, inst: &Instance) -> Vec<Option<Rational>> {
        self.trees.iter().map(|p| p.delta(inst)).collect()
    }

    /// Merges the active groups of the two slices in every tree where both
    /// are active. Returns, per such tree, whether each side had exactly one
    /// active group (the projected-clustering invariant).
    pub fn apply_merge(
        &mut self,
        inst: &Instance,
        set1: &BTreeSet<VertexId>,
        set2: &BTreeSet<VertexId>,
    ) -> Vec<(usize, bool)> {
        let mut outcomes = Vec::new();
        for r in 0..self.trees.len() {
            let p = &self.trees[r];
            let slice1 = p.slice_of(set1);
            let slice2 = p.slice_of(set2);
            if !p.slice_active(inst, set1) || !p.slice_active(inst, set2) {
                continue;
            }
            let g1 = p.active_groups_in(inst, &slice1);
            let g2 = p.active_groups_in(inst, &slice2);
            let unique = g1.len() == 1 && g2.len() == 1;
            if let (Some(&a), Some(&b)) = (g1.first(), g2.first()) {
                if a != b {
                    self.trees[r].merge_groups(a, b);
                }
            }
            outcomes.push((r, unique));
        }
        outcomes
    }
}
