//! Brute-force ground truth: exact Steiner tree by the Dreyfus–Wagner
//! dynamic program over terminal subsets, and exact Steiner forest by
//! enumerating partitions of the demand pairs into trees.
//!
//! Any instance vertex may serve as a Steiner point; the metric closure
//! already encodes every interesting intermediate, so a single relaxation
//! round suffices in the extension phase of the DP.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::forest::{self, Edge};
use crate::instance::{Instance, VertexId};
use crate::rational::Rational;

/// Hard limit for the public Steiner tree oracle.
pub const STEINER_TREE_TERMINAL_LIMIT: usize = 12;
/// Pair limit for the forest oracle (Bell-number enumeration).
pub const STEINER_FOREST_PAIR_LIMIT: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("terminal set of size {0} exceeds the oracle limit {1}")]
    TooManyTerminals(usize, usize),
    #[error("{0} demand pairs exceed the oracle limit {1}")]
    TooManyPairs(usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub partitions_explored: usize,
    pub dp_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub cost: Rational,
    pub forest: Vec<Edge>,
    /// Demand-pair indices grouped into trees (a single block for the tree
    /// oracle).
    pub partition: Vec<Vec<usize>>,
    pub search_stats: SearchStats,
}

/// Minimum-cost tree spanning `terminal_set`, Steiner points allowed at any
/// instance vertex.
pub fn steiner_tree_exact(
    inst: &Instance,
    terminal_set: &[VertexId],
) -> Result<OracleResult, OracleError> {
    let terms: BTreeSet<VertexId> = terminal_set.iter().copied().collect();
    if terms.len() > STEINER_TREE_TERMINAL_LIMIT {
        return Err(OracleError::TooManyTerminals(
            terms.len(),
            STEINER_TREE_TERMINAL_LIMIT,
        ));
    }
    let mut stats = SearchStats::default();
    let (cost, edges) = dreyfus_wagner(inst, &terms, &mut stats);
    Ok(OracleResult {
        cost,
        forest: edges,
        partition: vec![Vec::new()],
        search_stats: stats,
    })
}

/// Minimum-cost Steiner forest: enumerates every partition of the demand
/// pairs into blocks, solving each block with the tree DP (memoized by
/// block). Equal-cost ties prefer finer partitions.
pub fn steiner_forest_exact(inst: &Instance) -> Result<OracleResult, OracleError> {
    let k = inst.num_pairs();
    if k > STEINER_FOREST_PAIR_LIMIT {
        return Err(OracleError::TooManyPairs(k, STEINER_FOREST_PAIR_LIMIT));
    }
    let mut stats = SearchStats::default();
    if k == 0 {
        return Ok(OracleResult {
            cost: Rational::ZERO,
            forest: Vec::new(),
            partition: Vec::new(),
            search_stats: stats,
        });
    }
    let mut memo: BTreeMap<Vec<usize>, (Rational, Vec<Edge>)> = BTreeMap::new();
    let mut best: Option<(Rational, Vec<Vec<usize>>, Vec<Edge>)> = None;
    for rgs in RestrictedGrowth::new(k) {
        stats.partitions_explored += 1;
        let blocks = blocks_of(&rgs);
        let mut cost = Rational::ZERO;
        let mut edges = Vec::new();
        for block in &blocks {
            let key = block.clone();
            let (c, e) = match memo.get(&key) {
                Some(hit) => hit.clone(),
                None => {
                    let mut terms = BTreeSet::new();
                    for &p in block {
                        let (s, t) = inst.demands()[p];
                        terms.insert(s);
                        terms.insert(t);
                    }
                    let result = dreyfus_wagner(inst, &terms, &mut stats);
                    memo.insert(key, result.clone());
                    result
                }
            };
            cost += c;
            edges.extend(e);
        }
        let better = match &best {
            None => true,
            Some((bc, bp, _)) => cost < *bc || (cost == *bc && blocks.len() > bp.len()),
        };
        if better {
            best = Some((cost, blocks, edges));
        }
    }
    let (cost, partition, edges) = best.expect("k >= 1 yields at least one partition");
    let forest = forest::maximal_acyclic(inst.num_vertices(), &edges);
    Ok(OracleResult {
        cost,
        forest,
        partition,
        search_stats: stats,
    })
}

fn blocks_of(rgs: &[usize]) -> Vec<Vec<usize>> {
    let nblocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); nblocks];
    for (i, &b) in rgs.iter().enumerate() {
        blocks[b].push(i);
    }
    blocks
}

/// Iterator over restricted growth strings of length `k` (set partitions in
/// canonical order).
struct RestrictedGrowth {
    current: Option<Vec<usize>>,
}

impl RestrictedGrowth {
    fn new(k: usize) -> Self {
        RestrictedGrowth {
            current: Some(vec![0; k]),
        }
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        // Advance: rightmost position (excluding 0) that can grow by one.
        let mut next = out.clone();
        for i in (1..next.len()).rev() {
            let cap = next[..i].iter().copied().max().unwrap_or(0) + 1;
            if next[i] < cap {
                next[i] += 1;
                for v in next.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Dreyfus–Wagner with parent tracking for tree reconstruction.
/// `dp[mask][v]` is the cheapest tree spanning the terminals in `mask`
/// together with vertex `v`.
fn dreyfus_wagner(
    inst: &Instance,
    terminals: &BTreeSet<VertexId>,
    stats: &mut SearchStats,
) -> (Rational, Vec<Edge>) {
    let terms: Vec<VertexId> = terminals.iter().copied().collect();
    let t = terms.len();
    let n = inst.num_vertices();
    if t <= 1 {
        return (Rational::ZERO, Vec::new());
    }
    if t == 2 {
        let (a, b) = (terms[0], terms[1]);
        let d = inst.dist(a, b);
        return (d, vec![Edge::new(a, b, d)]);
    }
    let full: usize = (1 << t) - 1;
    let mut dp = vec![vec![Rational::ZERO; n]; full + 1];
    // ext[mask][v]: vertex the tree was extended from (a terminal for
    // singleton masks); split[mask][u]: submask chosen at the branch vertex.
    let mut ext = vec![vec![usize::MAX; n]; full + 1];
    let mut split = vec![vec![0usize; n]; full + 1];
    stats.dp_cells += (full + 1) * n;

    for i in 0..t {
        let mask = 1usize << i;
        for v in 0..n {
            dp[mask][v] = inst.dist(terms[i], v);
            ext[mask][v] = terms[i];
        }
    }
    let mut masks: Vec<usize> = (1..=full).filter(|m| m.count_ones() >= 2).collect();
    masks.sort_by_key(|m| m.count_ones());
    for &mask in &masks {
        let low = mask & mask.wrapping_neg();
        let mut inner: Vec<Option<Rational>> = vec![None; n];
        let mut inner_split = vec![0usize; n];
        // Submasks containing the lowest bit, to visit each split once.
        let mut e = (mask - 1) & mask;
        while e != 0 {
            if e & low != 0 {
                let rest = mask ^ e;
                for v in 0..n {
                    let cand = dp[e][v] + dp[rest][v];
                    if inner[v].map_or(true, |cur| cand < cur) {
                        inner[v] = Some(cand);
                        inner_split[v] = e;
                    }
                }
            }
            e = (e - 1) & mask;
        }
        for v in 0..n {
            let mut best = inner[v].expect("every mask with >=2 bits splits");
            let mut from = v;
            for u in 0..n {
                let cand = inner[u].expect("computed") + inst.dist(u, v);
                if cand < best {
                    best = cand;
                    from = u;
                }
            }
            dp[mask][v] = best;
            ext[mask][v] = from;
            split[mask][v] = inner_split[from];
        }
    }

    let root = terms[0];
    let cost = dp[full][root];
    let mut edges: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut stack = vec![(full, root)];
    while let Some((mask, v)) = stack.pop() {
        if mask.count_ones() == 1 {
            let term = ext[mask][v];
            if term != v {
                edges.insert((term.min(v), term.max(v)));
            }
            continue;
        }
        let u = ext[mask][v];
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
        // split[mask][v] is the submask combined at the extension source u.
        let e = split[mask][v];
        stack.push((e, u));
        stack.push((mask ^ e, u));
    }
    let edge_list: Vec<Edge> = edges
        .into_iter()
        .map(|(u, v)| Edge::new(u, v, inst.dist(u, v)))
        .collect();
    let tree = forest::maximal_acyclic(n, &edge_list);
    (cost, tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn two_terminals_is_shortest_path() {
        let inst = Instance::from_parts(vec![vec![r(0), r(4)], vec![r(4), r(0)]], vec![(0, 1)]);
        let res = steiner_tree_exact(&inst, &[0, 1]).unwrap();
        assert_eq!(res.cost, r(4));
        assert_eq!(res.forest.len(), 1);
    }

    #[test]
    fn collinear_terminals() {
        // d(a,b)=2, d(b,c)=3, d(a,c)=5: optimal tree is the path a-b-c.
        let inst = Instance::from_parts(
            vec![
                vec![r(0), r(2), r(5)],
                vec![r(2), r(0), r(3)],
                vec![r(5), r(3), r(0)],
            ],
            vec![],
        );
        let res = steiner_tree_exact(&inst, &[0, 1, 2]).unwrap();
        assert_eq!(res.cost, r(5));
    }

    #[test]
    fn steiner_point_is_used() {
        // Star: center 3 at distance 2 from each leaf; leaf-leaf distance 4.
        let inst = Instance::from_parts(
            vec![
                vec![r(0), r(4), r(4), r(2)],
                vec![r(4), r(0), r(4), r(2)],
                vec![r(4), r(4), r(0), r(2)],
                vec![r(2), r(2), r(2), r(0)],
            ],
            vec![],
        );
        let res = steiner_tree_exact(&inst, &[0, 1, 2]).unwrap();
        assert_eq!(res.cost, r(6), "star through the center beats any path");
        assert_eq!(res.forest.len(), 3);
    }

    #[test]
    fn tree_limit_enforced() {
        let n = 26;
        let mut dist = vec![vec![r(1); n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = r(0);
        }
        let inst = Instance::from_parts(dist, vec![]);
        let terms: Vec<usize> = (0..13).collect();
        assert!(matches!(
            steiner_tree_exact(&inst, &terms),
            Err(OracleError::TooManyTerminals(13, _))
        ));
    }

    #[test]
    fn single_pair_forest() {
        let inst = Instance::from_parts(vec![vec![r(0), r(9)], vec![r(9), r(0)]], vec![(0, 1)]);
        let res = steiner_forest_exact(&inst).unwrap();
        assert_eq!(res.cost, r(9));
        assert_eq!(res.partition, vec![vec![0]]);
    }

    #[test]
    fn far_apart_pairs_split() {
        // Two pairs, intra distance 1, inter distance 100.
        let d = |a: usize, b: usize| -> Rational {
            if a == b {
                r(0)
            } else if (a < 2) == (b < 2) {
                r(1)
            } else {
                r(100)
            }
        };
        let dist = (0..4).map(|i| (0..4).map(|j| d(i, j)).collect()).collect();
        let inst = Instance::from_parts(dist, vec![(0, 1), (2, 3)]);
        let res = steiner_forest_exact(&inst).unwrap();
        assert_eq!(res.cost, r(2));
        assert_eq!(res.partition.len(), 2);
        assert!(forest::is_feasible(&inst, &res.forest));
    }

    #[test]
    fn partition_count_is_bell_number() {
        assert_eq!(RestrictedGrowth::new(1).count(), 1);
        assert_eq!(RestrictedGrowth::new(3).count(), 5);
        assert_eq!(RestrictedGrowth::new(5).count(), 52);
        assert_eq!(RestrictedGrowth::new(7).count(), 877);
    }

    #[test]
    fn oracle_scales_with_metric() {
        let inst = crate::instance::gen_random(3, 8, 77);
        let base = steiner_forest_exact(&inst).unwrap();
        let three = Rational::from_int(3);
        let scaled_dist = (0..inst.num_vertices())
            .map(|i| {
                (0..inst.num_vertices())
                    .map(|j| inst.dist(i, j) * three)
                    .collect()
            })
            .collect();
        let scaled = Instance::from_parts(scaled_dist, inst.demands().to_vec());
        let res = steiner_forest_exact(&scaled).unwrap();
        assert_eq!(res.cost, base.cost * three);
    }

    #[test]
    fn solver_costs_dominate_oracle() {
        for seed in 0..10 {
            let inst = crate::instance::gen_random(3, 9, 900 + seed);
            let opt = steiner_forest_exact(&inst).unwrap();
            assert!(forest::is_feasible(&inst, &opt.forest));
            let trace = crate::greedy::gluttonous(&inst, &crate::greedy::TieRule::Lex);
            assert!(trace.total_cost >= opt.cost, "seed {seed}");
        }
    }
}
