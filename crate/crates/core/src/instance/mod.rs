//! Steiner forest instances: a finite metric plus disjoint demand pairs.
//!
//! Distances are exact rationals. The validator enforces the normalization
//! that every nonzero distance is at least 1; [`Instance::normalize`] rescales
//! an instance into that range and reports the factor so results can be
//! mapped back to original units.

mod generators;
mod graphs;
mod sfi;

pub use generators::{gen_girth_lb, gen_hub_chain, gen_ladder, gen_random, GirthInstanceSpec};
pub use graphs::{builtin_cubic, builtin_cubic_names, CubicGraph};
pub use sfi::{load, load_str, parse_sfi, save, to_sfi_string};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Vertices are dense indices `0..n`.
pub type VertexId = usize;

/// A metric space together with disjoint demand pairs.
///
/// Immutable after construction; solvers share references freely.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    dist: Vec<Vec<Rational>>,
    demands: Vec<(VertexId, VertexId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("negative distance at ({0},{1})")]
    Negative(VertexId, VertexId),
    #[error("nonzero diagonal at {0}")]
    NonzeroDiagonal(VertexId),
    #[error("asymmetry at ({0},{1})")]
    Asymmetry(VertexId, VertexId),
    #[error("triangle violation ({0},{1},{2})")]
    TriangleViolation(VertexId, VertexId, VertexId),
    #[error("nonzero distance < 1 at ({0},{1})")]
    SubUnitDistance(VertexId, VertexId),
    #[error("demand pair ({0},{1}) out of range or degenerate")]
    BadDemand(VertexId, VertexId),
    #[error("overlapping demands: terminal {0} appears in two pairs")]
    OverlappingDemands(VertexId),
    #[error("distance matrix is not square")]
    NotSquare,
}

impl Instance {
    /// Builds an instance without validating; call [`Instance::validate`]
    /// before handing it to a solver.
    pub fn from_parts(dist: Vec<Vec<Rational>>, demands: Vec<(VertexId, VertexId)>) -> Self {
        Instance { dist, demands }
    }

    pub fn num_vertices(&self) -> usize {
        self.dist.len()
    }

    pub fn dist(&self, u: VertexId, v: VertexId) -> Rational {
        self.dist[u][v]
    }

    pub fn demands(&self) -> &[(VertexId, VertexId)] {
        &self.demands
    }

    pub fn num_pairs(&self) -> usize {
        self.demands.len()
    }

    /// Terminals in demand-list order: pair `k` contributes indices `2k` and
    /// `2k+1`. This ordering is the tie-break index used by the timed
    /// algorithms when choosing leaders.
    pub fn terminals(&self) -> Vec<VertexId> {
        let mut t = Vec::with_capacity(2 * self.demands.len());
        for &(u, v) in &self.demands {
            t.push(u);
            t.push(v);
        }
        t
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.demands.iter().any(|&(a, b)| a == v || b == v)
    }

    /// The mate of a terminal, or `None` for non-terminals.
    pub fn mate(&self, v: VertexId) -> Option<VertexId> {
        for &(a, b) in &self.demands {
            if a == v {
                return Some(b);
            }
            if b == v {
                return Some(a);
            }
        }
        None
    }

    /// Position of a terminal in demand-list order (see [`Instance::terminals`]).
    pub fn terminal_index(&self, v: VertexId) -> Option<usize> {
        for (k, &(a, b)) in self.demands.iter().enumerate() {
            if a == v {
                return Some(2 * k);
            }
            if b == v {
                return Some(2 * k + 1);
            }
        }
        None
    }

    /// Checks every instance axiom, reporting the first violation found with
    /// a witness. Scans in a fixed order so the report is deterministic.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.dist.len();
        if self.dist.iter().any(|row| row.len() != n) {
            return Err(InstanceError::NotSquare);
        }
        for i in 0..n {
            if !self.dist[i][i].is_zero() {
                return Err(InstanceError::NonzeroDiagonal(i));
            }
            for j in 0..n {
                if self.dist[i][j].is_negative() {
                    return Err(InstanceError::Negative(i, j));
                }
                if self.dist[i][j] != self.dist[j][i] {
                    return Err(InstanceError::Asymmetry(i.min(j), i.max(j)));
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    if self.dist[i][k] + self.dist[k][j] < self.dist[i][j] {
                        return Err(InstanceError::TriangleViolation(i, k, j));
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !self.dist[i][j].is_zero() && self.dist[i][j] < Rational::ONE {
                    return Err(InstanceError::SubUnitDistance(i, j));
                }
            }
        }
        let mut seen: BTreeMap<VertexId, ()> = BTreeMap::new();
        for &(u, v) in &self.demands {
            if u >= n || v >= n || u == v {
                return Err(InstanceError::BadDemand(u, v));
            }
            for t in [u, v] {
                if seen.insert(t, ()).is_some() {
                    return Err(InstanceError::OverlappingDemands(t));
                }
            }
        }
        Ok(())
    }

    /// Smallest nonzero distance, if any.
    pub fn min_nonzero_distance(&self) -> Option<Rational> {
        let n = self.dist.len();
        let mut best: Option<Rational> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist[i][j];
                if !d.is_zero() {
                    best = Some(best.map_or(d, |b| b.min(d)));
                }
            }
        }
        best
    }

    /// Rescales so the minimum nonzero distance is exactly 1 when it was
    /// below 1, returning the new instance and the factor `scale` such that
    /// `original_length = scale * normalized_length`.
    pub fn normalize(&self) -> (Instance, Rational) {
        match self.min_nonzero_distance() {
            Some(m) if m < Rational::ONE => {
                let scaled = self
                    .dist
                    .iter()
                    .map(|row| row.iter().map(|&d| d / m).collect())
                    .collect();
                (Instance::from_parts(scaled, self.demands.clone()), m)
            }
            _ => (self.clone(), Rational::ONE),
        }
    }

    /// Replaces the metric by its shortest-path closure. Used by generators
    /// that specify only a sparse set of defining edges.
    pub fn close_metric(&mut self) {
        let n = self.dist.len();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = self.dist[i][k] + self.dist[k][j];
                    if via < self.dist[i][j] {
                        self.dist[i][j] = via;
                    }
                }
            }
        }
    }

    /// The same point set and demands under the metric where the connected
    /// components of `edges` are contracted (distance zero inside a
    /// component). Used for second-stage augmentation and reconnection
    /// distances.
    pub fn contract_edges(&self, edges: &[(VertexId, VertexId)]) -> Instance {
        let n = self.num_vertices();
        let mut dist = self.dist.clone();
        let mut uf = crate::forest::UnionFind::new(n);
        for &(u, v) in edges {
            uf.union(u, v);
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && uf.find(i) == uf.find(j) {
                    dist[i][j] = Rational::ZERO;
                }
            }
        }
        let mut out = Instance::from_parts(dist, self.demands.clone());
        out.close_metric();
        out
    }
}

/// Builds a metric from a sparse edge list by shortest-path closure.
/// Missing distances start at "infinity" (a large sentinel) and must be
/// reachable, otherwise `None` is returned.
pub fn metric_from_edges(
    n: usize,
    edges: &[(VertexId, VertexId, Rational)],
    demands: Vec<(VertexId, VertexId)>,
) -> Option<Instance> {
    // Sentinel larger than any path: (1 + sum of edge lengths).
    let total: Rational = edges.iter().map(|&(_, _, w)| w).sum();
    let inf = total + Rational::ONE;
    let mut dist = vec![vec![inf; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = Rational::ZERO;
    }
    for &(u, v, w) in edges {
        if w < dist[u][v] {
            dist[u][v] = w;
            dist[v][u] = w;
        }
    }
    let mut inst = Instance::from_parts(dist, demands);
    inst.close_metric();
    if (0..n).any(|i| (0..n).any(|j| inst.dist(i, j) >= inf)) {
        return None;
    }
    Some(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn minimal_valid_instance() {
        let inst = Instance::from_parts(
            vec![vec![r(0), r(3)], vec![r(3), r(0)]],
            vec![(0, 1)],
        );
        assert!(inst.validate().is_ok());
    }

    #[test]
    fn asymmetry_is_reported() {
        let inst = Instance::from_parts(
            vec![vec![r(0), r(5)], vec![r(4), r(0)]],
            vec![(0, 1)],
        );
        assert_eq!(inst.validate(), Err(InstanceError::Asymmetry(0, 1)));
    }

    #[test]
    fn triangle_violation_is_reported() {
        let inst = Instance::from_parts(
            vec![
                vec![r(0), r(1), r(5)],
                vec![r(1), r(0), r(1)],
                vec![r(5), r(1), r(0)],
            ],
            vec![],
        );
        assert!(matches!(
            inst.validate(),
            Err(InstanceError::TriangleViolation(_, _, _))
        ));
    }

    #[test]
    fn overlapping_demands_rejected() {
        let inst = Instance::from_parts(
            vec![vec![r(0), r(2), r(2)], vec![r(2), r(0), r(2)], vec![r(2), r(2), r(0)]],
            vec![(0, 1), (1, 2)],
        );
        assert_eq!(inst.validate(), Err(InstanceError::OverlappingDemands(1)));
    }

    #[test]
    fn sub_unit_distance_rejected_and_normalized() {
        let inst = Instance::from_parts(
            vec![vec![r(0), Rational::new(1, 2)], vec![Rational::new(1, 2), r(0)]],
            vec![(0, 1)],
        );
        assert_eq!(inst.validate(), Err(InstanceError::SubUnitDistance(0, 1)));
        let (norm, scale) = inst.normalize();
        assert_eq!(scale, Rational::new(1, 2));
        assert!(norm.validate().is_ok());
        assert_eq!(norm.dist(0, 1), Rational::ONE);
    }
}
