//! End-to-end certifier runs over the random suite, including the mutation
//! check that guards the certificates against vacuity.

use steiner_greedy::certify::{
    build_faithful, charge_trace, delta_accounting, updateforest_trace, DeletionRule,
};
use steiner_greedy::exact::steiner_forest_exact;
use steiner_greedy::forest::{self, Edge};
use steiner_greedy::greedy::{gluttonous, TieRule};
use steiner_greedy::instance::gen_random;

fn faithful_trees(
    inst: &steiner_greedy::Instance,
    seed: u64,
) -> (steiner_greedy::RunTrace, Vec<Vec<Edge>>) {
    let opt = steiner_forest_exact(inst).unwrap();
    let trace = gluttonous(inst, &TieRule::Lex);
    let (fss, report) = build_faithful(inst, &opt.forest, &trace).unwrap();
    assert!(report.passed(), "seed {seed}: {:?}", report.failed_checks());
    let trees = forest::components(inst.num_vertices(), &fss)
        .into_iter()
        .map(|comp| {
            fss.iter()
                .filter(|e| comp.contains(&e.u))
                .copied()
                .collect()
        })
        .collect();
    (trace, trees)
}

#[test]
fn updateforest_passes_on_faithful_suite() {
    for seed in 0..30 {
        let inst = gen_random(1 + (seed as usize % 5), 10, 8600 + seed);
        let (trace, trees) = faithful_trees(&inst, seed);
        for tree in trees {
            let report =
                updateforest_trace(&inst, &tree, &trace, DeletionRule::HighestPotential).unwrap();
            assert!(report.passed(), "seed {seed}: {:?}", report.failed_checks());
        }
    }
}

#[test]
fn mutation_mode_breaks_some_check() {
    // Deleting the first cycle edge instead of the highest-potential one
    // must produce at least one certificate failure somewhere in the suite;
    // otherwise the checks would be vacuous. The hub-chain member of the
    // suite is the shape that separates the two rules: its arm potentials
    // sit far below every delta/6 threshold, so the arbitrary rule starves
    // the deletion ledger.
    let mut failures = 0usize;
    let mut instances: Vec<steiner_greedy::Instance> = (0..30)
        .map(|seed| gen_random(1 + (seed as usize % 5), 10, 8600 + seed))
        .collect();
    instances.push(steiner_greedy::instance::gen_hub_chain(10).unwrap());
    for (seed, inst) in instances.iter().enumerate() {
        let (trace, trees) = faithful_trees(inst, seed as u64);
        for tree in trees {
            let honest =
                updateforest_trace(inst, &tree, &trace, DeletionRule::HighestPotential).unwrap();
            assert!(honest.passed(), "honest rule must pass: {:?}", honest.failed_checks());
            if let Ok(report) = updateforest_trace(inst, &tree, &trace, DeletionRule::FirstEdge) {
                if !report.passed() {
                    failures += 1;
                }
            }
        }
    }
    assert!(failures > 0, "first-edge mutation never tripped a check");
}

#[test]
fn delta_and_charge_pass_on_suite() {
    for seed in 0..15 {
        let inst = gen_random(1 + (seed as usize % 5), 10, 8800 + seed);
        let opt = steiner_forest_exact(&inst).unwrap();
        let trace = gluttonous(&inst, &TieRule::Lex);
        let delta = delta_accounting(&inst, &opt.forest, &trace).unwrap();
        assert!(delta.passed(), "seed {seed}: {:?}", delta.failed_checks());
        let charge = charge_trace(&inst, &opt.forest, &trace).unwrap();
        assert!(charge.passed(), "seed {seed}: {:?}", charge.failed_checks());
    }
}
