//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS/FAIL` line (run with `--nocapture` to see them on
//! success). All comparisons are exact rational comparisons with zero slack
//! above the stated bounds.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use steiner_greedy::certify::{
    build_faithful, charge_trace, updateforest_trace, DeletionRule, Membership,
};
use steiner_greedy::clustering::{ActivityPolicy, LevelActivity, MateActivity};
use steiner_greedy::costshare::{
    chi_groupstrict, chi_unistrict, verify_groupstrict, verify_nesting, verify_unistrict,
};
use steiner_greedy::exact::{steiner_forest_exact, OracleResult};
use steiner_greedy::forest::{self, Edge};
use steiner_greedy::greedy::{
    gluttonous, gluttonous_contract, paired_greedy, timed_gluttonous, TieRule,
};
use steiner_greedy::instance::{
    builtin_cubic, gen_girth_lb, gen_hub_chain, gen_ladder, gen_random, GirthInstanceSpec,
    Instance,
};
use steiner_greedy::primal_dual::{group_strict_a, timed_primal_dual, unistrict_a, ActivitySchedule};
use steiner_greedy::rational::Rational;
use steiner_greedy::stochastic::{
    boosted_sampling, exact_two_stage, scenario_feasible, second_stage_augment,
    ScenarioDistribution,
};
use steiner_greedy::RunTrace;

const SUITE_SIZE: usize = 200;

struct Entry {
    inst: Instance,
    opt: OracleResult,
}

fn suite() -> &'static Vec<Entry> {
    static SUITE: OnceLock<Vec<Entry>> = OnceLock::new();
    SUITE.get_or_init(|| {
        (0..SUITE_SIZE as u64)
            .map(|seed| {
                let k = 1 + (seed as usize % 6);
                let extra = (seed as usize / 6) % 3;
                let inst = gen_random(k, 2 * k + extra, 31_000 + seed);
                assert!(inst.validate().is_ok());
                let opt = steiner_forest_exact(&inst).expect("within oracle limits");
                Entry { inst, opt }
            })
            .collect()
    })
}

fn r(n: i128) -> Rational {
    Rational::from_int(n)
}

fn check_ratio(name: &str, cost: Rational, opt: Rational, bound: i128, seed: usize) {
    assert!(
        cost <= r(bound) * opt,
        "criterion 1: {name} ratio exceeded on suite entry {seed}: cost {cost}, opt {opt}"
    );
}

#[test]
fn criterion_1_approximation_bounds() {
    for (i, e) in suite().iter().enumerate() {
        let opt = e.opt.cost;
        let tie = TieRule::Lex;
        let g = gluttonous(&e.inst, &tie);
        assert!(forest::is_feasible(&e.inst, &g.forest));
        check_ratio("gluttonous", g.total_cost, opt, 96, i);
        let c = gluttonous_contract(&e.inst, &tie);
        assert!(forest::is_feasible(&e.inst, &c.forest));
        check_ratio("gluttonous-contract", c.total_cost, opt, 96, i);
        let t = timed_gluttonous(&e.inst, 2, &tie).unwrap();
        assert!(forest::is_feasible(&e.inst, &t.forest));
        check_ratio("timed-gluttonous", t.total_cost, opt, 480, i);
        let (tpd, _) = timed_primal_dual(&e.inst, &ActivitySchedule::half_distance(&e.inst)).unwrap();
        assert!(forest::is_feasible(&e.inst, &tpd.forest));
        check_ratio("tpd-half-distance", tpd.total_cost, opt, 2, i);
        let u = unistrict_a(&e.inst, 2, &tie).unwrap();
        assert!(forest::is_feasible(&e.inst, &u.forest));
        check_ratio("unistrict-A", u.total_cost, opt, 2880, i);
        let (gs, _) = group_strict_a(&e.inst, 2).unwrap();
        assert!(forest::is_feasible(&e.inst, &gs.forest));
        check_ratio("group-strict-A", gs.total_cost, opt, 96, i);
    }
    println!(
        "criterion 1: PASS (ratio bounds 96/96/480/2/2880/96 over {} instances)",
        suite().len()
    );
}

/// Replays a trace and asserts both selected supernodes were active at
/// selection time under the algorithm's activity policy.
fn assert_no_inactive_selected(inst: &Instance, trace: &RunTrace) {
    let mate = MateActivity { inst };
    let levels = LevelActivity::levels_for(inst, trace.base_c.unwrap_or(2));
    let mut members = Membership::initial(inst);
    for ev in &trace.events {
        for id in [ev.s1, ev.s2] {
            let set = members.get(id).expect("live supernode").clone();
            let active = if ev.stage >= 0 {
                LevelActivity {
                    levels: levels.clone(),
                    stage: ev.stage,
                }
                .is_active(&set)
            } else {
                mate.is_active(&set)
            };
            assert!(
                active,
                "inactive supernode {id} selected at iteration {}",
                ev.iteration
            );
        }
    }
}

#[test]
fn criterion_2_trace_invariants() {
    for e in suite().iter() {
        let tie = TieRule::Lex;
        let traces = vec![
            gluttonous(&e.inst, &tie),
            gluttonous_contract(&e.inst, &tie),
            timed_gluttonous(&e.inst, 2, &tie).unwrap(),
        ];
        for trace in &traces {
            let deltas = trace.merging_distances();
            assert!(
                deltas.windows(2).all(|w| w[0] <= w[1]),
                "merging distances must be nondecreasing ({:?})",
                trace.algorithm
            );
            assert!(
                trace.total_cost <= trace.sum_of_merging_distances(),
                "forest cost must not exceed the sum of merging distances"
            );
            assert_no_inactive_selected(&e.inst, trace);
        }
        let paired = paired_greedy(&e.inst);
        assert!(paired.total_cost <= paired.sum_of_merging_distances());
    }
    println!("criterion 2: PASS (merge monotonicity, cost bound, activity discipline)");
}

fn faithful_trees(inst: &Instance, opt: &OracleResult) -> (RunTrace, Vec<Vec<Edge>>) {
    let trace = gluttonous(inst, &TieRule::Lex);
    let (fss, report) = build_faithful(inst, &opt.forest, &trace).expect("certifiable");
    assert!(report.passed(), "faithful rebuild: {:?}", report.failed_checks());
    assert!(
        forest::total_cost(&fss) <= r(2) * opt.cost,
        "faithful forest must stay within twice the optimum"
    );
    let trees = forest::components(inst.num_vertices(), &fss)
        .into_iter()
        .map(|comp| fss.iter().filter(|e| comp.contains(&e.u)).copied().collect())
        .collect();
    (trace, trees)
}

#[test]
fn criterion_3_certifier_suite() {
    let mut mutation_failures = 0usize;
    for e in suite().iter() {
        let (trace, trees) = faithful_trees(&e.inst, &e.opt);
        for tree in &trees {
            if tree.is_empty() {
                continue;
            }
            let report = updateforest_trace(&e.inst, tree, &trace, DeletionRule::HighestPotential)
                .expect("certifiable");
            assert!(report.passed(), "updateforest: {:?}", report.failed_checks());
            if let Ok(mutated) = updateforest_trace(&e.inst, tree, &trace, DeletionRule::FirstEdge)
            {
                if !mutated.passed() {
                    mutation_failures += 1;
                }
            }
        }
        let charge = charge_trace(&e.inst, &e.opt.forest, &trace).expect("certifiable");
        assert!(charge.passed(), "charge ledger: {:?}", charge.failed_checks());
    }
    // The hub-chain member of the mutation suite separates the rules.
    let adversarial = gen_hub_chain(10).unwrap();
    let opt = steiner_forest_exact(&adversarial).unwrap();
    let (trace, trees) = faithful_trees(&adversarial, &opt);
    for tree in &trees {
        let honest = updateforest_trace(&adversarial, tree, &trace, DeletionRule::HighestPotential)
            .unwrap();
        assert!(honest.passed(), "hub chain honest: {:?}", honest.failed_checks());
        let mutated =
            updateforest_trace(&adversarial, tree, &trace, DeletionRule::FirstEdge).unwrap();
        if !mutated.passed() {
            mutation_failures += 1;
        }
    }
    assert!(
        mutation_failures >= 1,
        "delete-first-edge mutation must fail at least once across the suite"
    );
    println!(
        "criterion 3: PASS (faithful/updateforest/charge certified; {mutation_failures} mutation failures observed)"
    );
}

#[test]
fn criterion_4_cost_shares() {
    let tie = TieRule::Lex;
    for (i, e) in suite().iter().enumerate() {
        let (uni, _) = chi_unistrict(&e.inst, 2, &tie).unwrap();
        assert!(
            uni.total() <= e.opt.cost,
            "uni-strict budget balance failed on entry {i}"
        );
        let (grp, _) = chi_groupstrict(&e.inst, 2, &tie).unwrap();
        assert!(
            grp.total() <= e.opt.cost,
            "group-strict budget balance failed on entry {i}"
        );
        for target in 0..e.inst.num_pairs() {
            let report = verify_unistrict(&e.inst, target, 2, &tie).unwrap();
            assert!(
                report.passed(),
                "verify_unistrict failed on entry {i} target {target}: {:?}",
                report.failed_checks()
            );
            let nesting = verify_nesting(&e.inst, target, 2, &tie).unwrap();
            assert!(
                nesting.passed(),
                "verify_nesting failed on entry {i} target {target}: {:?}",
                nesting.failed_checks()
            );
        }
    }
    // >= 50 random bipartitions for group strictness.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31_777);
    let mut bipartitions = 0usize;
    for e in suite().iter() {
        if bipartitions >= 50 {
            break;
        }
        if e.inst.num_pairs() < 2 {
            continue;
        }
        let mut d1 = Vec::new();
        let mut d2 = Vec::new();
        for k in 0..e.inst.num_pairs() {
            if rng.gen_bool(0.5) {
                d1.push(k);
            } else {
                d2.push(k);
            }
        }
        let (_, report) = verify_groupstrict(&e.inst, &d1, &d2, 2, &tie).unwrap();
        assert!(
            report.passed(),
            "verify_groupstrict failed: {:?}",
            report.failed_checks()
        );
        bipartitions += 1;
    }
    assert!(bipartitions >= 50, "need at least 50 bipartitions");
    println!(
        "criterion 4: PASS (budget balance, uni-strictness, nesting, {bipartitions} group-strict bipartitions)"
    );
}

#[test]
fn criterion_5_figure_two_reproduction() {
    // As stated: on the ladder with only the rung demands, the group-strict
    // algorithm must return exactly N components, and the punctured
    // reconnection distance for the long pair must equal 2N + 2 + 0.2.
    let mut failures = Vec::new();
    for n in [3usize, 5, 10] {
        let ladder = gen_ladder(n, Rational::new(1, 10)).unwrap();
        let full = ladder.demands().to_vec();
        let rungs: Vec<(usize, usize)> = full[1..].to_vec();
        let dist = (0..ladder.num_vertices())
            .map(|i| (0..ladder.num_vertices()).map(|j| ladder.dist(i, j)).collect())
            .collect();
        let d1_inst = Instance::from_parts(dist, rungs);
        let (trace, _) = group_strict_a(&d1_inst, 2).unwrap();
        let comps = forest::components(d1_inst.num_vertices(), &trace.forest);
        let plain: Vec<(usize, usize)> = trace.forest.iter().map(|e| (e.u, e.v)).collect();
        let (s, sbar) = full[0];
        let reconnection = ladder.contract_edges(&plain).dist(s, sbar);
        let expected = r(2 * n as i128 + 2) + Rational::new(2, 10);
        if comps.len() != n {
            failures.push(format!(
                "N={n}: got {} components, expected {n}",
                comps.len()
            ));
        }
        if reconnection != expected {
            failures.push(format!(
                "N={n}: reconnection {reconnection}, expected {expected}"
            ));
        }
    }
    if failures.is_empty() {
        println!("criterion 5: PASS (Figure-2 dotted forest reproduced)");
    } else {
        println!("criterion 5: FAIL ({})", failures.join("; "));
        panic!(
            "criterion 5 is unattainable under the module contracts: the \
             group-strict activity times (6*c^(level+1) = 24 for the rungs) \
             force moats two apart to meet while active, and the timed \
             primal-dual contract then requires them in one tree; the \
             Figure-2 dotted forest describes the classic mate-terminated \
             primal-dual instead. Details in the project notes. {failures:?}"
        );
    }
}

#[test]
fn criterion_6_girth_behavior() {
    for name in ["petersen", "heawood"] {
        let base = builtin_cubic(name).unwrap();
        let spec = GirthInstanceSpec::from_builtin(base).unwrap();
        let inst = gen_girth_lb(&spec).unwrap();
        let matching = spec.demand_matching();
        let trace = paired_greedy(&inst);
        assert_eq!(trace.events.len(), matching.len(), "{name}: one round per pair");
        for ev in &trace.events {
            let (s, t) = inst.demands()[ev.s1 / 2];
            assert_eq!(
                ev.bought,
                vec![Edge::new(s.min(t), s.max(t), spec.long_edge_length)],
                "{name}: every round must buy exactly the direct matching edge"
            );
        }
        let expected = Rational::from_int(matching.len() as i128) * spec.long_edge_length;
        assert_eq!(trace.total_cost, expected, "{name}: total |M| * g/2");
        let glut = gluttonous(&inst, &TieRule::Lex);
        let tree_cost = r(inst.num_vertices() as i128 - 1);
        assert!(
            glut.total_cost <= r(96) * tree_cost,
            "{name}: gluttonous within 96 (n-1)"
        );
    }
    // Size sweep: paired-greedy/tree-cost ratio nondecreasing in girth.
    let mut last: Option<Rational> = None;
    let mut sweep = String::new();
    for name in ["k4", "k33", "petersen", "heawood", "mcgee", "tutte-coxeter"] {
        let base = builtin_cubic(name).unwrap();
        let spec = GirthInstanceSpec::from_builtin(base.clone()).unwrap();
        let inst = gen_girth_lb(&spec).unwrap();
        let trace = paired_greedy(&inst);
        let ratio = trace.total_cost / r(base.n as i128 - 1);
        sweep.push_str(&format!("{name}={ratio} "));
        if let Some(prev) = last {
            assert!(
                ratio >= prev,
                "sweep ratio decreased at {name}: {prev} -> {ratio}"
            );
        }
        last = Some(ratio);
    }
    println!("criterion 6: PASS (direct-edge behavior; sweep {sweep})");
}

#[test]
fn criterion_7_stochastic() {
    let tie = TieRule::Lex;
    // Feasibility: 100 seeds x 20 realized scenarios.
    let inst = gen_random(4, 10, 55_001);
    let pi = ScenarioDistribution {
        scenarios: vec![
            (Rational::new(1, 4), vec![0]),
            (Rational::new(1, 4), vec![1, 2]),
            (Rational::new(1, 4), vec![0, 3]),
            (Rational::new(1, 4), vec![1, 2, 3]),
        ],
    };
    for seed in 0..100u64 {
        let plan = boosted_sampling(&inst, &pi, r(2), seed, 2, &tie).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed ^ 0xabcd);
        for _ in 0..20 {
            let ix = pi.sample(&mut rng);
            let realized = &pi.scenarios[ix].1;
            let aug = second_stage_augment(&inst, &plan.first_stage, realized, 2, &tie).unwrap();
            assert!(
                scenario_feasible(&inst, &plan.first_stage, &aug, realized),
                "seed {seed}: infeasible scenario {ix}"
            );
        }
    }
    // Regression envelope vs the exact two-stage oracle across 20 seeds.
    let small = gen_random(4, 9, 55_002);
    let pi3 = ScenarioDistribution {
        scenarios: vec![
            (Rational::new(1, 2), vec![0, 1]),
            (Rational::new(1, 4), vec![2]),
            (Rational::new(1, 4), vec![1, 3]),
        ],
    };
    let sigma = r(2);
    let (_, exact) = exact_two_stage(&small, &pi3, sigma).unwrap();
    for seed in 0..20u64 {
        let plan = boosted_sampling(&small, &pi3, sigma, seed, 2, &tie).unwrap();
        // Exact expected two-stage cost of the sampled plan over the
        // explicit support.
        let mut value = plan.first_stage_cost;
        for (p, pairs) in &pi3.scenarios {
            let aug = second_stage_augment(&small, &plan.first_stage, pairs, 2, &tie).unwrap();
            value += sigma * *p * forest::total_cost(&aug);
        }
        assert!(
            value <= r(30) * exact,
            "seed {seed}: plan cost {value} vs exact {exact}"
        );
    }
    println!("criterion 7: PASS (feasibility 100x20; 30x envelope over 20 seeds)");
}

#[test]
fn criterion_8_determinism() {
    let tie = TieRule::Lex;
    let inst = gen_random(4, 11, 66_001);
    let a = gluttonous(&inst, &tie).to_json_lines(None);
    let b = gluttonous(&inst, &tie).to_json_lines(None);
    assert_eq!(a, b, "gluttonous traces must be byte-identical");
    let t1 = timed_gluttonous(&inst, 2, &tie).unwrap().to_json_lines(None);
    let t2 = timed_gluttonous(&inst, 2, &tie).unwrap().to_json_lines(None);
    assert_eq!(t1, t2);
    let (s1, _) = chi_groupstrict(&inst, 2, &tie).unwrap();
    let (s2, _) = chi_groupstrict(&inst, 2, &tie).unwrap();
    assert_eq!(s1.to_json(), s2.to_json(), "share tables must be byte-identical");
    let opt = steiner_forest_exact(&inst).unwrap();
    let trace = gluttonous(&inst, &tie);
    let r1 = charge_trace(&inst, &opt.forest, &trace).unwrap().to_json();
    let r2 = charge_trace(&inst, &opt.forest, &trace).unwrap().to_json();
    assert_eq!(r1, r2, "reports must be byte-identical");
    let d1: Vec<usize> = vec![0, 1];
    let d2: Vec<usize> = vec![2, 3];
    let (c1, _) = verify_groupstrict(&inst, &d1, &d2, 2, &tie).unwrap();
    let (c2, _) = verify_groupstrict(&inst, &d1, &d2, 2, &tie).unwrap();
    assert_eq!(c1.to_json(), c2.to_json());
    let pi = ScenarioDistribution {
        scenarios: vec![
            (Rational::new(1, 2), vec![0]),
            (Rational::new(1, 2), vec![1, 2]),
        ],
    };
    let p1 = boosted_sampling(&inst, &pi, r(2), 9, 2, &tie).unwrap();
    let p2 = boosted_sampling(&inst, &pi, r(2), 9, 2, &tie).unwrap();
    assert_eq!(
        serde_json::to_string(&p1).unwrap(),
        serde_json::to_string(&p2).unwrap()
    );
    // Distinct demand unions stay monotone under a longer prefix of draws.
    let longer = boosted_sampling(&inst, &pi, r(5), 9, 2, &tie).unwrap();
    let union_of = |log: &[usize]| -> BTreeSet<usize> {
        log.iter()
            .flat_map(|&ix| pi.scenarios[ix].1.iter().copied())
            .collect()
    };
    assert!(union_of(&p1.sample_log).is_subset(&union_of(&longer.sample_log)));
    println!("criterion 8: PASS (byte-identical traces, tables, reports, plans)");
}
