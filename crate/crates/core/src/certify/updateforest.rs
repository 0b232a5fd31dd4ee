//! Replay of the candidate-forest update procedure: maintain a tree over
//! the current supernodes (inactive supernodes and original non-terminals
//! act as Steiner nodes), each edge carrying its original-metric length and
//! a potential equal to the total length short-cut into it.
//!
//! Per relevant iteration the procedure merges the two supernodes, deletes
//! the highest-potential cycle edge, and short-cuts degree-2 Steiner nodes.
//! The certifier checks potential conservation, Steiner degrees, the
//! long-edge count, the deleted-edge charge bound, the 48x cost bound, and
//! the bounded-preimage greedy matching.

use std::collections::{BTreeMap, BTreeSet};

use crate::clustering::SupernodeId;
use crate::forest::{self, Edge};
use crate::instance::{Instance, VertexId};
use crate::rational::Rational;
use crate::trace::{AlgorithmTag, RunTrace};

use super::{mate_active, CertifyError, CertificateReport, Membership};

/// Which cycle edge to delete in step 5. `FirstEdge` is the mutation mode
/// used to show the certificate checks are not vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeletionRule {
    HighestPotential,
    FirstEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Super(SupernodeId),
    Steiner(VertexId),
}

#[derive(Debug, Clone)]
struct CfEdge {
    id: usize,
    a: Node,
    b: Node,
    /// Original-metric endpoints on the `a` and `b` sides.
    ea: VertexId,
    eb: VertexId,
    length: Rational,
    potential: Rational,
}

#[derive(Debug, Clone)]
struct CandidateTree {
    edges: BTreeMap<usize, CfEdge>,
    next_id: usize,
}

impl CandidateTree {
    fn nodes(&self) -> BTreeSet<Node> {
        self.edges
            .values()
            .flat_map(|e| [e.a, e.b])
            .collect()
    }

    fn degree(&self, n: Node) -> usize {
        self.edges
            .values()
            .map(|e| (e.a == n) as usize + (e.b == n) as usize)
            .sum()
    }

    /// Distinct (non-loop) edges incident to `n`.
    fn incident(&self, n: Node) -> Vec<usize> {
        self.edges
            .values()
            .filter(|e| (e.a == n) ^ (e.b == n))
            .map(|e| e.id)
            .collect()
    }

    fn replace_node(&mut self, from: Node, to: Node) {
        for e in self.edges.values_mut() {
            if e.a == from {
                e.a = to;
            }
            if e.b == from {
                e.b = to;
            }
        }
    }

    /// Short-cuts the two distinct edges incident to `v` into one edge with
    /// summed potential. Lengths live in the induced instance where `v` is
    /// a single contracted point, so the new length is the path length
    /// through it (never less than the metric distance of the far ends).
    fn shortcut(&mut self, v: Node) {
        let inc = self.incident(v);
        assert_eq!(inc.len(), 2, "shortcut needs exactly two incident edges");
        let e1 = self.edges.remove(&inc[0]).expect("live edge");
        let e2 = self.edges.remove(&inc[1]).expect("live edge");
        let far = |e: &CfEdge| if e.a == v { (e.b, e.eb) } else { (e.a, e.ea) };
        let (n1, x1) = far(&e1);
        let (n2, x2) = far(&e2);
        let id = self.next_id;
        self.next_id += 1;
        self.edges.insert(
            id,
            CfEdge {
                id,
                a: n1,
                b: n2,
                ea: x1,
                eb: x2,
                length: e1.length + e2.length,
                potential: e1.potential + e2.potential,
            },
        );
    }

    /// Edge ids of the unique cycle, found by trimming leaves. Empty when
    /// the graph is acyclic.
    fn cycle(&self) -> Vec<usize> {
        let mut alive: BTreeSet<usize> = self.edges.keys().copied().collect();
        loop {
            let mut degree: BTreeMap<Node, usize> = BTreeMap::new();
            for id in &alive {
                let e = &self.edges[id];
                *degree.entry(e.a).or_insert(0) += 1;
                *degree.entry(e.b).or_insert(0) += 1;
            }
            let leaves: BTreeSet<Node> = degree
                .iter()
                .filter(|(_, &d)| d <= 1)
                .map(|(&n, _)| n)
                .collect();
            if leaves.is_empty() {
                break;
            }
            let before = alive.len();
            alive.retain(|id| {
                let e = &self.edges[id];
                !(leaves.contains(&e.a) || leaves.contains(&e.b))
            });
            if alive.len() == before {
                break;
            }
        }
        alive.into_iter().collect()
    }

    fn live_potential(&self) -> Rational {
        self.edges.values().map(|e| e.potential).sum()
    }
}

/// Replays `trace` against the single tree `tstar`, certifying the
/// candidate-forest invariants. The trace must come from gluttonous and be
/// faithful to `tstar` (obtain `tstar` from a faithful rebuild first).
pub fn updateforest_trace(
    inst: &Instance,
    tstar: &[Edge],
    trace: &RunTrace,
    rule: DeletionRule,
) -> Result<CertificateReport, CertifyError> {
    if trace.algorithm != AlgorithmTag::Gluttonous {
        return Err(CertifyError::WrongAlgorithm {
            expected: "gluttonous".into(),
            got: trace.algorithm.to_string(),
        });
    }
    let verts: BTreeSet<VertexId> = tstar.iter().flat_map(|e| [e.u, e.v]).collect();
    if tstar.is_empty() || !forest::is_acyclic(inst.num_vertices(), tstar) {
        return Err(CertifyError::NotATree);
    }
    if forest::components(inst.num_vertices(), tstar).len() != 1 {
        return Err(CertifyError::NotATree);
    }
    // Every terminal on the tree must have its mate on the tree, otherwise
    // relevance is ill-defined.
    for &v in &verts {
        if let Some(m) = inst.mate(v) {
            if !verts.contains(&m) {
                return Err(CertifyError::TraceMismatch(format!(
                    "terminal {v} on the tree but its mate {m} is not"
                )));
            }
        }
    }

    let mut report = CertificateReport::default();
    let node_of = |v: VertexId| -> Node {
        match inst.terminal_index(v) {
            Some(ix) => Node::Super(ix),
            None => Node::Steiner(v),
        }
    };
    let mut tree = CandidateTree {
        edges: BTreeMap::new(),
        next_id: 0,
    };
    for e in tstar {
        let id = tree.next_id;
        tree.next_id += 1;
        tree.edges.insert(
            id,
            CfEdge {
                id,
                a: node_of(e.u),
                b: node_of(e.v),
                ea: e.u,
                eb: e.v,
                length: e.len,
                potential: Rational::ZERO,
            },
        );
    }
    // Initial cleanup: drop Steiner leaves, short-cut degree-2 Steiner
    // nodes, then freeze potentials at the cleaned lengths.
    loop {
        let mut changed = false;
        for n in tree.nodes() {
            if matches!(n, Node::Steiner(_)) {
                match tree.degree(n) {
                    0 | 1 => {
                        let inc = tree.incident(n);
                        for id in inc {
                            tree.edges.remove(&id);
                        }
                        changed = true;
                        break;
                    }
                    2 => {
                        tree.shortcut(n);
                        changed = true;
                        break;
                    }
                    _ => {}
                }
            }
        }
        if !changed {
            break;
        }
    }
    for e in tree.edges.values_mut() {
        e.potential = e.length;
    }
    let baseline: Rational = tree.edges.values().map(|e| e.length).sum();
    report.push(
        "cleaned-tree-cost",
        baseline <= forest::total_cost(tstar),
        baseline,
        forest::total_cost(tstar),
        "cost after removing redundant Steiner nodes",
    );

    let mut members = Membership::initial(inst);
    // Step-5 cycle deletions; Theorem charge and the matching read this.
    let mut ledger: Vec<(usize, CfEdge)> = Vec::new();
    // Edges of pruned Steiner leaves (a repair the procedure needs when a
    // merged supernode comes out of step 5 with degree 1); they count for
    // potential conservation but are not step-5 deletions.
    let mut pruned: Vec<CfEdge> = Vec::new();
    // (iteration, delta, active supernodes in the tree before the merge)
    let mut relevant: Vec<(usize, Rational, usize)> = Vec::new();

    for event in &trace.events {
        let set1 = members
            .get(event.s1)
            .ok_or_else(|| CertifyError::TraceMismatch(format!("unknown supernode {}", event.s1)))?
            .clone();
        let set2 = members
            .get(event.s2)
            .ok_or_else(|| CertifyError::TraceMismatch(format!("unknown supernode {}", event.s2)))?
            .clone();
        let in1 = set1.iter().all(|v| verts.contains(v));
        let in2 = set2.iter().all(|v| verts.contains(v));
        let out1 = set1.iter().all(|v| !verts.contains(v));
        let out2 = set2.iter().all(|v| !verts.contains(v));
        if !(in1 && in2) {
            if (in1 || in2) || !(out1 && out2) {
                if !(out1 && out2) {
                    return Err(CertifyError::TraceMismatch(format!(
                        "iteration {} mixes tree and non-tree terminals",
                        event.iteration
                    )));
                }
            }
            members.apply(event)?;
            continue;
        }

        // Relevant iteration.
        let tree_nodes = tree.nodes();
        let n_active = members
            .live()
            .filter(|(id, set)| tree_nodes.contains(&Node::Super(**id)) && mate_active(inst, set))
            .count();
        relevant.push((event.iteration, event.delta, n_active));

        let six = Rational::from_int(6);
        let long = tree
            .edges
            .values()
            .filter(|e| six * e.length >= event.delta)
            .count();
        report.push(
            format!("lemma-long-iter-{}", event.iteration),
            2 * long >= n_active,
            format!("{long} long edges"),
            format!("{n_active}/2"),
            format!("delta {}", event.delta),
        );

        let node1 = Node::Super(event.s1);
        let node2 = Node::Super(event.s2);
        if !tree_nodes.contains(&node1) || !tree_nodes.contains(&node2) {
            return Err(CertifyError::TraceMismatch(format!(
                "iteration {}: merged supernode missing from the candidate tree",
                event.iteration
            )));
        }
        let merged_set = members.apply(event)?;
        let merged_node = Node::Super(event.merged_into);
        tree.replace_node(node1, merged_node);
        tree.replace_node(node2, merged_node);

        // Step 3: a newly inactive degree-2 supernode is short-cut before
        // the cycle is located (skip if its incidences collapsed to a loop).
        if !mate_active(inst, &merged_set)
            && tree.degree(merged_node) == 2
            && tree.incident(merged_node).len() == 2
        {
            tree.shortcut(merged_node);
        }

        // Steps 4-5: delete one cycle edge.
        let cycle = tree.cycle();
        if cycle.is_empty() {
            return Err(CertifyError::TraceMismatch(format!(
                "iteration {}: merge created no cycle",
                event.iteration
            )));
        }
        let victim = match rule {
            DeletionRule::HighestPotential => cycle
                .iter()
                .copied()
                .max_by(|&x, &y| {
                    (tree.edges[&x].potential, std::cmp::Reverse(x))
                        .cmp(&(tree.edges[&y].potential, std::cmp::Reverse(y)))
                })
                .expect("cycle nonempty"),
            DeletionRule::FirstEdge => cycle.iter().copied().min().expect("cycle nonempty"),
        };
        let deleted = tree.edges.remove(&victim).expect("live edge");
        ledger.push((event.iteration, deleted));

        // Step 6: short-cut degree-2 Steiner nodes (inactive supernodes and
        // original non-terminals). A merged supernode whose parents were a
        // path end can come out of step 5 at degree 1; such Steiner leaves
        // carry no terminals that still matter, so their edges move to the
        // deletion ledger, keeping the potential ledger conserved.
        let mut shortcuts = 0;
        loop {
            let is_steiner = |n: Node| match n {
                Node::Steiner(_) => true,
                Node::Super(id) => members.get(id).map_or(true, |set| !mate_active(inst, set)),
            };
            // Short-cut degree-2 nodes first; only a Steiner node that ends
            // up a leaf gets its edge deleted (into the ledger).
            if let Some(n) = tree
                .nodes()
                .into_iter()
                .find(|&n| is_steiner(n) && tree.degree(n) == 2 && tree.incident(n).len() == 2)
            {
                tree.shortcut(n);
                shortcuts += 1;
                continue;
            }
            if let Some(n) = tree
                .nodes()
                .into_iter()
                .find(|&n| is_steiner(n) && tree.degree(n) <= 1)
            {
                for id in tree.incident(n) {
                    let e = tree.edges.remove(&id).expect("live edge");
                    pruned.push(e);
                }
                continue;
            }
            break;
        }
        report.push(
            format!("step6-shortcuts-iter-{}", event.iteration),
            shortcuts <= 2,
            shortcuts,
            2,
            "while-loop iterations in step 6",
        );

        // Claim: Steiner nodes keep degree >= 3.
        let mut min_steiner_degree: Option<(usize, Node)> = None;
        for n in tree.nodes() {
            let steiner = match n {
                Node::Steiner(_) => true,
                Node::Super(id) => members.get(id).map_or(true, |set| !mate_active(inst, set)),
            };
            if steiner {
                let d = tree.degree(n);
                if min_steiner_degree.map_or(true, |(best, _)| d < best) {
                    min_steiner_degree = Some((d, n));
                }
            }
        }
        if let Some((d, n)) = min_steiner_degree {
            report.push(
                format!("steiner-degree-iter-{}", event.iteration),
                d >= 3,
                d,
                3,
                format!("{n:?}"),
            );
        }

        // Potential conservation: live + deleted + pruned = cleaned cost,
        // exactly.
        let del_potential: Rational = ledger.iter().map(|(_, e)| e.potential).sum();
        let pruned_potential: Rational = pruned.iter().map(|e| e.potential).sum();
        report.check_eq(
            format!("potential-conservation-iter-{}", event.iteration),
            tree.live_potential() + del_potential + pruned_potential,
            baseline,
            "sum of live, deleted and pruned potentials",
        );
        // Potentials dominate lengths on live and deleted edges.
        let dominated = tree
            .edges
            .values()
            .chain(ledger.iter().map(|(_, e)| e))
            .all(|e| e.potential >= e.length);
        report.push(
            format!("potential-dominates-length-iter-{}", event.iteration),
            dominated,
            "phi >= length",
            "required",
            "all live and deleted edges",
        );
    }

    // Theorem charge: enough high-potential deleted edges per iteration.
    let six = Rational::from_int(6);
    for &(iter, delta, n_active) in &relevant {
        let count = ledger
            .iter()
            .filter(|(_, e)| six * e.potential >= delta)
            .count();
        report.push(
            format!("theorem-charge-iter-{iter}"),
            8 * count >= n_active,
            format!("{count} deleted edges of potential >= {}/6", delta),
            format!("{n_active}/8"),
            "final deleted ledger",
        );
    }

    // Total relevant merging cost within 48x the tree cost.
    let sum_delta: Rational = relevant.iter().map(|&(_, d, _)| d).sum();
    report.check_le(
        "sum-delta-le-48-cost",
        sum_delta,
        Rational::from_int(48) * baseline,
        format!("{} relevant iterations", relevant.len()),
    );

    // Greedy matching g: iterations in descending delta, each charged to a
    // deleted edge of potential >= delta/6 holding fewer than 8 charges.
    let mut order: Vec<(usize, Rational)> =
        relevant.iter().map(|&(it, d, _)| (it, d)).collect();
    order.sort_by(|a, b| (b.1, a.0).cmp(&(a.1, b.0)));
    let mut load: BTreeMap<usize, usize> = BTreeMap::new();
    let mut unmatched = Vec::new();
    for (it, delta) in order {
        let pick = ledger
            .iter()
            .enumerate()
            .filter(|(ix, (_, e))| six * e.potential >= delta && load.get(ix).copied().unwrap_or(0) < 8)
            .max_by(|(ix_a, (_, ea)), (ix_b, (_, eb))| {
                (ea.potential, std::cmp::Reverse(*ix_a))
                    .cmp(&(eb.potential, std::cmp::Reverse(*ix_b)))
            })
            .map(|(ix, _)| ix);
        match pick {
            Some(ix) => *load.entry(ix).or_insert(0) += 1,
            None => unmatched.push(it),
        }
    }
    report.push(
        "mapping-g-preimage-le-8",
        unmatched.is_empty(),
        format!("{} unmatched iterations", unmatched.len()),
        "0",
        format!("{unmatched:?}"),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::steiner_forest_exact;
    use crate::greedy::{gluttonous, TieRule};
    use crate::instance::gen_random;

    #[test]
    fn single_pair_exact_ledger() {
        let inst = Instance::from_parts(
            vec![
                vec![Rational::ZERO, Rational::from_int(5)],
                vec![Rational::from_int(5), Rational::ZERO],
            ],
            vec![(0, 1)],
        );
        let tstar = vec![Edge::new(0, 1, Rational::from_int(5))];
        let trace = gluttonous(&inst, &TieRule::Lex);
        let report = updateforest_trace(&inst, &tstar, &trace, DeletionRule::HighestPotential).unwrap();
        assert!(report.passed(), "{:?}", report.failed_checks());
    }

    #[test]
    fn faithful_oracle_trees_pass_all_checks() {
        let mut seen_relevant = false;
        for seed in 0..20 {
            let inst = gen_random(1 + (seed as usize % 4), 9, 3000 + seed);
            let opt = steiner_forest_exact(&inst).unwrap();
            let trace = gluttonous(&inst, &TieRule::Lex);
            let (fss, _) = super::super::build_faithful(&inst, &opt.forest, &trace).unwrap();
            for comp in forest::components(inst.num_vertices(), &fss) {
                let tree: Vec<Edge> = fss.iter().filter(|e| comp.contains(&e.u)).copied().collect();
                if tree.is_empty() {
                    continue;
                }
                let report =
                    updateforest_trace(&inst, &tree, &trace, DeletionRule::HighestPotential)
                        .unwrap();
                assert!(report.passed(), "seed {seed}: {:?}", report.failed_checks());
                seen_relevant = true;
            }
        }
        assert!(seen_relevant);
    }

    #[test]
    fn not_a_tree_rejected() {
        let inst = gen_random(2, 6, 9);
        let trace = gluttonous(&inst, &TieRule::Lex);
        let junk = vec![
            Edge::new(0, 1, inst.dist(0, 1)),
            Edge::new(2, 3, inst.dist(2, 3)),
        ];
        assert!(matches!(
            updateforest_trace(&inst, &junk, &trace, DeletionRule::HighestPotential),
            Err(CertifyError::NotATree) | Err(CertifyError::TraceMismatch(_))
        ));
    }
}
