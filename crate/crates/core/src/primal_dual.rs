//! Timed moat-growing primal-dual solver.
//!
//! Each terminal carries an activity time `tau(s)` and is active for all
//! times `t <= tau(s)`. Components holding an active terminal grow their
//! dual at unit rate; a vertex pair `(u, v)` becomes tight when the growth
//! accumulated by the components containing `u` and `v` (while separated)
//! reaches `d(u, v)`. On tightness the edge is bought and the components
//! merge. Inactive components stop growing but can still be absorbed.
//!
//! Simultaneous events are processed in lexicographic component-id order,
//! so runs are deterministic under the exact arithmetic.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::clustering::{ActivityPolicy, Clustering, PuncturedMetric};
use crate::forest::{self, Edge};
use crate::greedy::{timed_gluttonous, TieRule};
use crate::instance::{Instance, VertexId};
use crate::rational::{int_pow, Rational};
use crate::trace::{AlgorithmTag, MergeEvent, RunTrace};

/// Per-terminal activity times. Time units are length units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySchedule {
    times: BTreeMap<VertexId, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("schedule missing terminal {0}")]
    MissingTerminal(VertexId),
    #[error("negative activity time for terminal {0}")]
    NegativeTime(VertexId),
}

impl ActivitySchedule {
    pub fn new(times: BTreeMap<VertexId, Rational>) -> Self {
        ActivitySchedule { times }
    }

    /// The canonical schedule `tau(s) = d(s, mate(s)) / 2`.
    pub fn half_distance(inst: &Instance) -> Self {
        let mut times = BTreeMap::new();
        for &(s, t) in inst.demands() {
            let half = inst.dist(s, t) / Rational::from_int(2);
            times.insert(s, half);
            times.insert(t, half);
        }
        ActivitySchedule { times }
    }

    /// The inflated schedule `tau(s) = 6 * c^(level(s)+1)` used by the
    /// group-strict algorithm. Distance-0 pairs get time 0.
    pub fn group_strict(inst: &Instance, c: u32) -> Self {
        let mut times = BTreeMap::new();
        for &(s, t) in inst.demands() {
            let tau = match inst.dist(s, t).ceil_log(c) {
                Some(level) => Rational::from_int(6) * int_pow(c, level + 1),
                None => Rational::ZERO,
            };
            times.insert(s, tau);
            times.insert(t, tau);
        }
        ActivitySchedule { times }
    }

    pub fn scaled(&self, factor: Rational) -> Self {
        ActivitySchedule {
            times: self
                .times
                .iter()
                .map(|(&v, &t)| (v, t * factor))
                .collect(),
        }
    }

    pub fn time(&self, v: VertexId) -> Option<Rational> {
        self.times.get(&v).copied()
    }

    fn validate(&self, inst: &Instance) -> Result<(), ScheduleError> {
        for &t in &inst.terminals() {
            match self.times.get(&t) {
                None => return Err(ScheduleError::MissingTerminal(t)),
                Some(tau) if tau.is_negative() => return Err(ScheduleError::NegativeTime(t)),
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoatEvent {
    pub time: Rational,
    pub comp_a: usize,
    pub comp_b: usize,
    pub merged_into: usize,
    pub bought: Edge,
}

/// Full record of a timed primal-dual run: merge events with times, final
/// per-terminal radii, per-pair dual load, and the total dual raised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoatHistory {
    /// Initial singleton components: `(component id, terminal)`.
    pub initial: Vec<(usize, VertexId)>,
    pub events: Vec<MoatEvent>,
    /// Accumulated growth per terminal (its component's total active time).
    pub radii: BTreeMap<VertexId, Rational>,
    /// Final accumulated dual load per vertex pair; dual feasibility says
    /// this never exceeds the pair distance.
    pub pair_load: BTreeMap<(VertexId, VertexId), Rational>,
    /// Sum of all dual growth (the moat lower bound).
    pub total_dual: Rational,
}

impl MoatHistory {
    /// Moats just before `time`: components after all events with
    /// `event.time < time`.
    pub fn components_before(&self, time: Rational) -> Vec<BTreeSet<VertexId>> {
        let mut comps: BTreeMap<usize, BTreeSet<VertexId>> = self
            .initial
            .iter()
            .map(|&(id, v)| (id, [v].into_iter().collect()))
            .collect();
        for e in &self.events {
            if e.time < time {
                let mut merged = comps.remove(&e.comp_a).expect("live component");
                merged.extend(comps.remove(&e.comp_b).expect("live component"));
                comps.insert(e.merged_into, merged);
            }
        }
        comps.into_values().collect()
    }

    /// True when `u` and `v` share a moat just before `time`.
    pub fn same_moat_before(&self, u: VertexId, v: VertexId, time: Rational) -> bool {
        self.components_before(time)
            .iter()
            .any(|c| c.contains(&u) && c.contains(&v))
    }

    /// JSON lines: one record per event.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("serializable event"));
            out.push('\n');
        }
        out
    }
}

/// Stage boundaries for reading a moat history: stage `i >= 1` spans
/// `[m*c^i, m*c^(i+1))` and stage 0 spans `[0, m*c)`. The canonical
/// multiplier is 6; the certifiers can probe other readings.
#[derive(Debug, Clone, Copy)]
pub struct StageBoundaries {
    pub multiplier: Rational,
    pub base: u32,
}

impl StageBoundaries {
    pub fn canonical(base: u32) -> Self {
        StageBoundaries {
            multiplier: Rational::from_int(6),
            base,
        }
    }

    /// Start time of stage `i` (0 for stage 0).
    pub fn start(&self, i: i64) -> Rational {
        if i <= 0 {
            Rational::ZERO
        } else {
            self.multiplier * int_pow(self.base, i)
        }
    }

    pub fn end(&self, i: i64) -> Rational {
        self.multiplier * int_pow(self.base, i + 1)
    }
}

/// Runs the timed moat-growing process. Returns the trace (bought forest)
/// and the full moat history.
pub fn timed_primal_dual(
    inst: &Instance,
    schedule: &ActivitySchedule,
) -> Result<(RunTrace, MoatHistory), ScheduleError> {
    schedule.validate(inst)?;
    let terminals = inst.terminals();
    let k2 = terminals.len();
    let mut comp_of: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut comp_members: BTreeMap<usize, BTreeSet<VertexId>> = BTreeMap::new();
    let mut initial = Vec::new();
    for (i, &t) in terminals.iter().enumerate() {
        comp_of.insert(t, i);
        comp_members.insert(i, [t].into_iter().collect());
        initial.push((i, t));
    }
    let mut next_comp = k2;
    let mut radii: BTreeMap<VertexId, Rational> = terminals.iter().map(|&t| (t, Rational::ZERO)).collect();
    let mut pair_load: BTreeMap<(VertexId, VertexId), Rational> = BTreeMap::new();
    for (i, &u) in terminals.iter().enumerate() {
        for &v in &terminals[i + 1..] {
            if u != v {
                pair_load.insert((u.min(v), u.max(v)), Rational::ZERO);
            }
        }
    }
    let mut clock = Rational::ZERO;
    let mut total_dual = Rational::ZERO;
    let mut events: Vec<MoatEvent> = Vec::new();
    let mut trace_events: Vec<MergeEvent> = Vec::new();
    let mut bought: Vec<Edge> = Vec::new();

    // A component grows past `clock` while some member's activity time
    // still lies ahead.
    let comp_rate = |members: &BTreeSet<VertexId>, clock: Rational| -> bool {
        members
            .iter()
            .any(|v| schedule.time(*v).map_or(false, |tau| tau > clock))
    };

    loop {
        // Merge every pair that is tight right now, lexicographically by
        // component ids (then vertex ids).
        loop {
            let mut best: Option<(usize, usize, VertexId, VertexId)> = None;
            for (&(u, v), &load) in &pair_load {
                let (cu, cv) = (comp_of[&u], comp_of[&v]);
                if cu == cv {
                    continue;
                }
                if load == inst.dist(u, v) {
                    let key = (cu.min(cv), cu.max(cv), u, v);
                    let better = match &best {
                        None => true,
                        Some((a, b, x, y)) => key < (*a.min(b), *a.max(b), *x, *y),
                    };
                    if better {
                        best = Some((cu.min(cv), cu.max(cv), u, v));
                    }
                }
            }
            let Some((ca, cb, u, v)) = best else { break };
            let members_a = comp_members.remove(&ca).expect("live");
            let members_b = comp_members.remove(&cb).expect("live");
            let mut merged = members_a;
            merged.extend(members_b);
            let id = next_comp;
            next_comp += 1;
            for &m in &merged {
                comp_of.insert(m, id);
            }
            comp_members.insert(id, merged);
            let edge = Edge::new(u, v, inst.dist(u, v));
            bought.push(edge);
            events.push(MoatEvent {
                time: clock,
                comp_a: ca,
                comp_b: cb,
                merged_into: id,
                bought: edge,
            });
            trace_events.push(MergeEvent {
                iteration: trace_events.len() + 1,
                stage: -1,
                s1: ca,
                s2: cb,
                absorbed: Vec::new(),
                merged_into: id,
                delta: edge.len,
                bought: vec![edge],
            });
        }

        // Next event: the earliest tightness under current rates, or the
        // earliest expiry that changes a component's rate.
        let rates: BTreeMap<usize, bool> = comp_members
            .iter()
            .map(|(&id, members)| (id, comp_rate(members, clock)))
            .collect();
        let growing = rates.values().filter(|&&g| g).count();
        if growing == 0 {
            break;
        }
        let mut next_time: Option<Rational> = None;
        for (&(u, v), &load) in &pair_load {
            let (cu, cv) = (comp_of[&u], comp_of[&v]);
            if cu == cv {
                continue;
            }
            let rate = (rates[&cu] as i128) + (rates[&cv] as i128);
            if rate == 0 {
                continue;
            }
            let hit = clock + (inst.dist(u, v) - load) / Rational::from_int(rate);
            next_time = Some(next_time.map_or(hit, |t| t.min(hit)));
        }
        let mut next_expiry: Option<Rational> = None;
        for (id, members) in &comp_members {
            if !rates[id] {
                continue;
            }
            let expiry = members
                .iter()
                .filter_map(|v| schedule.time(*v))
                .filter(|&tau| tau > clock)
                .max()
                .expect("growing component has a future expiry");
            next_expiry = Some(next_expiry.map_or(expiry, |t| t.min(expiry)));
        }
        let target = match (next_time, next_expiry) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => break,
        };
        // Tight pairs were merged above and expiries are strictly ahead of
        // the clock, so time always advances.
        let dt = target - clock;
        assert!(dt > Rational::ZERO, "event loop must make progress");
        for ((u, v), load) in pair_load.iter_mut() {
            let (cu, cv) = (comp_of[u], comp_of[v]);
            if cu == cv {
                continue;
            }
            let rate = (rates[&cu] as i128) + (rates[&cv] as i128);
            if rate > 0 {
                *load += dt * Rational::from_int(rate);
                debug_assert!(*load <= inst.dist(*u, *v), "dual feasibility");
            }
        }
        for (&t, r) in radii.iter_mut() {
            if rates[&comp_of[&t]] {
                *r += dt;
            }
        }
        total_dual += dt * Rational::from_int(growing as i128);
        clock = target;
    }

    let forest = forest::maximal_acyclic(inst.num_vertices(), &bought);
    let total_cost = forest::total_cost(&forest);
    let final_clustering = comp_members
        .iter()
        .map(|(&id, set)| (id, set.clone()))
        .collect();
    let trace = RunTrace {
        algorithm: AlgorithmTag::TimedPrimalDual,
        tie_rule: "lex-component".to_owned(),
        base_c: None,
        events: trace_events,
        stages: Vec::new(),
        final_clustering,
        forest,
        total_cost,
    };
    let history = MoatHistory {
        initial,
        events,
        radii,
        pair_load,
        total_dual,
    };
    Ok((trace, history))
}

/// The group-strict algorithm: timed primal-dual with activity times
/// `6 * c^(level(s)+1)`.
pub fn group_strict_a(
    inst: &Instance,
    c: u32,
) -> Result<(RunTrace, MoatHistory), ScheduleError> {
    let schedule = ActivitySchedule::group_strict(inst, c);
    let (mut trace, history) = timed_primal_dual(inst, &schedule)?;
    trace.algorithm = AlgorithmTag::GroupStrictA;
    trace.base_c = Some(c);
    Ok((trace, history))
}

/// Width of one forest tree: largest tree distance between a demand pair
/// contained in it. The flag is false when the tree holds no complete pair
/// (width 0 by convention).
pub fn width(inst: &Instance, tree_edges: &[Edge]) -> (Rational, bool) {
    let verts: BTreeSet<VertexId> = tree_edges.iter().flat_map(|e| [e.u, e.v]).collect();
    let has_pair = inst
        .demands()
        .iter()
        .any(|&(s, t)| verts.contains(&s) && verts.contains(&t));
    (forest::tree_width(inst, tree_edges, &verts), has_pair)
}

struct NeverActive;

impl ActivityPolicy for NeverActive {
    fn is_active(&self, _members: &BTreeSet<VertexId>) -> bool {
        false
    }
}

/// The uni-strict algorithm: run timed gluttonous, then repeatedly connect
/// trees `T1, T2` while `d_{M/F}(T1, T2) <= 5 * min(width(T1), width(T2))`,
/// taking the qualifying pair with smallest (distance, tree ids) first.
pub fn unistrict_a(inst: &Instance, c: u32, tie: &TieRule) -> Result<RunTrace, crate::greedy::TimedError> {
    let mut trace = timed_gluttonous(inst, c, tie)?;
    let n = inst.num_vertices();
    let mut edges = trace.forest.clone();
    let five = Rational::from_int(5);
    loop {
        let comps = forest::components(n, &edges);
        if comps.len() < 2 {
            break;
        }
        let widths: Vec<Rational> = comps
            .iter()
            .map(|c| {
                let tree: Vec<Edge> = edges.iter().filter(|e| c.contains(&e.u)).copied().collect();
                forest::tree_width(inst, &tree, c)
            })
            .collect();
        let cl = Clustering::from_groups(comps.clone(), &NeverActive);
        let pm = PuncturedMetric::build(inst, &cl);
        let mut best: Option<(Rational, usize, usize)> = None;
        for i in 0..comps.len() {
            for j in (i + 1)..comps.len() {
                let (d, _) = pm.supernode_distance(i, j);
                if d <= five * widths[i].min(widths[j]) {
                    let better = match &best {
                        None => true,
                        Some((bd, bi, bj)) => (d, i, j) < (*bd, *bi, *bj),
                    };
                    if better {
                        best = Some((d, i, j));
                    }
                }
            }
        }
        let Some((d, i, j)) = best else { break };
        let (_, path, _) = pm.supernode_path(inst, i, j);
        trace.events.push(MergeEvent {
            iteration: trace.events.len() + 1,
            stage: -1,
            s1: i,
            s2: j,
            absorbed: Vec::new(),
            merged_into: usize::MAX,
            delta: d,
            bought: path.clone(),
        });
        edges.extend(path);
    }
    trace.algorithm = AlgorithmTag::UnistrictA;
    trace.forest = forest::maximal_acyclic(n, &edges);
    trace.total_cost = forest::total_cost(&trace.forest);
    Ok(trace)
}
