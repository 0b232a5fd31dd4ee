//! Two-stage stochastic Steiner forest by boosted sampling: draw
//! `ceil(sigma)` scenarios, run timed gluttonous on their union as the
//! first stage, and augment in the contracted metric once the real demand
//! set is revealed. A tiny exact two-stage oracle enumerates first-stage
//! edge subsets for regression checks.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact::{steiner_forest_exact, OracleError};
use crate::forest::{self, Edge, UnionFind};
use crate::greedy::{timed_gluttonous, TieRule, TimedError};
use crate::instance::{Instance, VertexId};
use crate::rational::Rational;

/// An explicit distribution over demand subsets: `(probability, pair
/// indices)` entries summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioDistribution {
    pub scenarios: Vec<(Rational, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StochasticError {
    #[error("scenario probabilities must be nonnegative and sum to 1")]
    BadProbabilities,
    #[error("scenario references pair index {0} outside the instance")]
    BadPairIndex(usize),
    #[error("sigma must exceed 1")]
    BadSigma,
    #[error("{0} scenarios exceed the exact two-stage limit {1}")]
    TooManyScenarios(usize, usize),
    #[error("candidate first-stage universe has {0} edges, limit {1}")]
    UniverseTooLarge(usize, usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Timed(#[from] TimedError),
}

pub const EXACT_SCENARIO_LIMIT: usize = 4;
pub const EXACT_UNIVERSE_LIMIT: usize = 16;

impl ScenarioDistribution {
    pub fn validate(&self, inst: &Instance) -> Result<(), StochasticError> {
        let mut total = Rational::ZERO;
        for (p, pairs) in &self.scenarios {
            if p.is_negative() {
                return Err(StochasticError::BadProbabilities);
            }
            total += *p;
            for &k in pairs {
                if k >= inst.num_pairs() {
                    return Err(StochasticError::BadPairIndex(k));
                }
            }
        }
        if total != Rational::ONE {
            return Err(StochasticError::BadProbabilities);
        }
        Ok(())
    }

    /// Draws a scenario index using exact cumulative weights over a common
    /// denominator, so replays are bit-identical for a fixed seed stream.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let denom = self
            .scenarios
            .iter()
            .fold(1i128, |acc, (p, _)| num_integer::lcm(acc, p.denom()));
        let weights: Vec<i128> = self
            .scenarios
            .iter()
            .map(|(p, _)| p.numer() * (denom / p.denom()))
            .collect();
        let total: i128 = weights.iter().sum();
        let mut draw = rng.gen_range(0..total as u128) as i128;
        for (i, w) in weights.iter().enumerate() {
            if draw < *w {
                return i;
            }
            draw -= w;
        }
        self.scenarios.len() - 1
    }

    /// Loads `{"sigma": r, "scenarios": [{"p": r, "pairs": [[u,v],...]}]}`,
    /// translating vertex pairs to demand indices of the instance.
    pub fn from_json(text: &str, inst: &Instance) -> Result<(Self, Rational), StochasticError> {
        #[derive(Deserialize)]
        struct FileScenario {
            p: Rational,
            pairs: Vec<(VertexId, VertexId)>,
        }
        #[derive(Deserialize)]
        struct File {
            sigma: Rational,
            scenarios: Vec<FileScenario>,
        }
        let file: File = serde_json::from_str(text)
            .map_err(|_| StochasticError::BadProbabilities)?;
        let index_of = |uv: (VertexId, VertexId)| -> Result<usize, StochasticError> {
            inst.demands()
                .iter()
                .position(|&(a, b)| (a, b) == uv || (b, a) == uv)
                .ok_or(StochasticError::BadPairIndex(usize::MAX))
        };
        let mut scenarios = Vec::new();
        for sc in file.scenarios {
            let mut pairs = Vec::new();
            for uv in sc.pairs {
                pairs.push(index_of(uv)?);
            }
            scenarios.push((sc.p, pairs));
        }
        let dist = ScenarioDistribution { scenarios };
        dist.validate(inst)?;
        Ok((dist, file.sigma))
    }
}

/// Monte-Carlo estimate with its empirical-variance confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanEstimate {
    pub samples: usize,
    pub mean: Rational,
    /// Half-width of the 95% interval from the empirical variance.
    pub ci_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStagePlan {
    pub first_stage: Vec<Edge>,
    pub first_stage_cost: Rational,
    /// Scenario indices drawn to build the first stage.
    pub sample_log: Vec<usize>,
    pub evaluation: Option<PlanEstimate>,
}

pub fn ceil_sigma(sigma: Rational) -> i128 {
    let (n, d) = (sigma.numer(), sigma.denom());
    n / d + i128::from(n % d != 0)
}

/// Boosted sampling: union of `ceil(sigma)` sampled scenarios, solved by
/// timed gluttonous; the forest is the first-stage edge set.
pub fn boosted_sampling(
    inst: &Instance,
    pi: &ScenarioDistribution,
    sigma: Rational,
    seed: u64,
    c: u32,
    tie: &TieRule,
) -> Result<TwoStagePlan, StochasticError> {
    pi.validate(inst)?;
    if sigma <= Rational::ONE {
        return Err(StochasticError::BadSigma);
    }
    let draws = ceil_sigma(sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut union: BTreeSet<usize> = BTreeSet::new();
    let mut log = Vec::new();
    for _ in 0..draws {
        let ix = pi.sample(&mut rng);
        log.push(ix);
        union.extend(pi.scenarios[ix].1.iter().copied());
    }
    let demands: Vec<(VertexId, VertexId)> =
        union.iter().map(|&k| inst.demands()[k]).collect();
    let sub = Instance::from_parts(full_matrix(inst), demands);
    let trace = timed_gluttonous(&sub, c, tie)?;
    Ok(TwoStagePlan {
        first_stage_cost: trace.total_cost,
        first_stage: trace.forest,
        sample_log: log,
        evaluation: None,
    })
}

fn full_matrix(inst: &Instance) -> Vec<Vec<Rational>> {
    (0..inst.num_vertices())
        .map(|i| (0..inst.num_vertices()).map(|j| inst.dist(i, j)).collect())
        .collect()
}

/// Second-stage augmentation: timed gluttonous on the realized demands in
/// the metric with the first stage contracted. Returned edges carry their
/// contracted lengths (the price actually paid on top of the first stage).
pub fn second_stage_augment(
    inst: &Instance,
    first_stage: &[Edge],
    realized_pairs: &[usize],
    c: u32,
    tie: &TieRule,
) -> Result<Vec<Edge>, StochasticError> {
    let plain: Vec<(VertexId, VertexId)> = first_stage.iter().map(|e| (e.u, e.v)).collect();
    let demands: Vec<(VertexId, VertexId)> = realized_pairs
        .iter()
        .map(|&k| {
            if k >= inst.num_pairs() {
                Err(StochasticError::BadPairIndex(k))
            } else {
                Ok(inst.demands()[k])
            }
        })
        .collect::<Result<_, _>>()?;
    let contracted =
        Instance::from_parts(full_matrix(inst), demands).contract_edges(&plain);
    let trace = timed_gluttonous(&contracted, c, tie)?;
    Ok(trace.forest)
}

/// Feasibility of a realized scenario under first stage plus augmentation.
pub fn scenario_feasible(
    inst: &Instance,
    first_stage: &[Edge],
    augmentation: &[Edge],
    realized_pairs: &[usize],
) -> bool {
    let n = inst.num_vertices();
    let mut uf = UnionFind::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if inst.dist(u, v).is_zero() {
                uf.union(u, v);
            }
        }
    }
    for e in first_stage.iter().chain(augmentation.iter()) {
        uf.union(e.u, e.v);
    }
    realized_pairs.iter().all(|&k| {
        let (a, b) = inst.demands()[k];
        uf.same(a, b)
    })
}

/// Monte-Carlo evaluation of a plan: `cost(E1) + sigma * E[augmentation]`.
pub fn evaluate_plan(
    inst: &Instance,
    plan: &mut TwoStagePlan,
    pi: &ScenarioDistribution,
    sigma: Rational,
    samples: usize,
    seed: u64,
    c: u32,
    tie: &TieRule,
) -> Result<(), StochasticError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<Rational> = Vec::with_capacity(samples);
    for _ in 0..samples {
        let ix = pi.sample(&mut rng);
        let aug = second_stage_augment(inst, &plan.first_stage, &pi.scenarios[ix].1, c, tie)?;
        let aug_cost = forest::total_cost(&aug);
        values.push(plan.first_stage_cost + sigma * aug_cost);
    }
    let n = values.len().max(1) as i128;
    let mean: Rational = values.iter().copied().sum::<Rational>() / Rational::from_int(n);
    let var: f64 = values
        .iter()
        .map(|v| {
            let d = (*v - mean).to_f64();
            d * d
        })
        .sum::<f64>()
        / (values.len().saturating_sub(1).max(1) as f64);
    plan.evaluation = Some(PlanEstimate {
        samples,
        mean,
        ci_halfwidth: 1.96 * (var / values.len().max(1) as f64).sqrt(),
    });
    Ok(())
}

/// Exact two-stage optimum for tiny explicit distributions: enumerate every
/// acyclic subset of a candidate first-stage universe (per-scenario oracle
/// forests plus direct demand edges) and price the second stage with the
/// exact oracle in the contracted metric.
pub fn exact_two_stage(
    inst: &Instance,
    pi: &ScenarioDistribution,
    sigma: Rational,
) -> Result<(Vec<Edge>, Rational), StochasticError> {
    pi.validate(inst)?;
    if sigma <= Rational::ONE {
        return Err(StochasticError::BadSigma);
    }
    if pi.scenarios.len() > EXACT_SCENARIO_LIMIT {
        return Err(StochasticError::TooManyScenarios(
            pi.scenarios.len(),
            EXACT_SCENARIO_LIMIT,
        ));
    }
    let mut universe: BTreeMap<(VertexId, VertexId), Edge> = BTreeMap::new();
    for (_, pairs) in &pi.scenarios {
        let demands: Vec<(VertexId, VertexId)> =
            pairs.iter().map(|&k| inst.demands()[k]).collect();
        let sub = Instance::from_parts(full_matrix(inst), demands.clone());
        let oracle = steiner_forest_exact(&sub)?;
        for e in oracle.forest {
            universe.insert(e.key(), e);
        }
        for (a, b) in demands {
            let e = Edge::new(a, b, inst.dist(a, b));
            universe.insert(e.key(), e);
        }
    }
    let edges: Vec<Edge> = universe.into_values().collect();
    if edges.len() > EXACT_UNIVERSE_LIMIT {
        return Err(StochasticError::UniverseTooLarge(
            edges.len(),
            EXACT_UNIVERSE_LIMIT,
        ));
    }
    let n = inst.num_vertices();
    // Second-stage costs keyed by the component signature of E1, since many
    // subsets contract identically.
    let mut memo: BTreeMap<(Vec<usize>, usize), Rational> = BTreeMap::new();
    let mut best: Option<(Rational, Vec<Edge>)> = None;
    for mask in 0u32..(1 << edges.len()) {
        let subset: Vec<Edge> = (0..edges.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| edges[i])
            .collect();
        if !forest::is_acyclic(n, &subset) {
            continue; // a cyclic subset is dominated by its spanning forest
        }
        let mut uf = UnionFind::new(n);
        for e in &subset {
            uf.union(e.u, e.v);
        }
        let signature: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
        let e1_cost = forest::total_cost(&subset);
        let mut value = e1_cost;
        for (s_ix, (p, pairs)) in pi.scenarios.iter().enumerate() {
            let key = (signature.clone(), s_ix);
            let aug = match memo.get(&key) {
                Some(&v) => v,
                None => {
                    let demands: Vec<(VertexId, VertexId)> =
                        pairs.iter().map(|&k| inst.demands()[k]).collect();
                    let plain: Vec<(VertexId, VertexId)> =
                        subset.iter().map(|e| (e.u, e.v)).collect();
                    let contracted = Instance::from_parts(full_matrix(inst), demands)
                        .contract_edges(&plain);
                    let v = steiner_forest_exact(&contracted)?.cost;
                    memo.insert(key, v);
                    v
                }
            };
            value += sigma * *p * aug;
        }
        if best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, subset));
        }
    }
    let (cost, plan) = best.expect("the empty subset is always feasible");
    Ok((plan, cost))
}
