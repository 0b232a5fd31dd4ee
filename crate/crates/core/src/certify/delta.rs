//! Per-tree accounting of the minimum active distances: for every tree of
//! the reference forest, the deltas of the iterations that touch it must
//! sum to at most 48 times the tree cost, and each per-tree delta sequence
//! must ascend.

use crate::forest::{self, Edge};
use crate::instance::Instance;
use crate::rational::Rational;
use crate::trace::RunTrace;

use super::projection::Projections;
use super::{CertifyError, CertificateReport, Membership};

/// Certifies the abstract accounting over any supernode-merging trace
/// (gluttonous, timed, or path-contraction).
pub fn delta_accounting(
    inst: &Instance,
    fstar: &[Edge],
    trace: &RunTrace,
) -> Result<CertificateReport, CertifyError> {
    if !forest::is_feasible(inst, fstar) {
        return Err(CertifyError::InfeasibleFstar);
    }
    let mut report = CertificateReport::default();
    let mut proj = Projections::new(inst, fstar);
    let ntrees = proj.trees.len();
    let mut members = Membership::initial(inst);
    let mut sums = vec![Rational::ZERO; ntrees];
    let mut last: Vec<Option<Rational>> = vec![None; ntrees];
    let mut exhausted = vec![false; ntrees];
    let mut ascending = vec![true; ntrees];
    let mut global_last: Option<Rational> = None;
    let mut global_ascending = true;

    for event in &trace.events {
        let set1 = members
            .get(event.s1)
            .ok_or_else(|| CertifyError::TraceMismatch(format!("unknown supernode {}", event.s1)))?
            .clone();
        let set2 = members
            .get(event.s2)
            .ok_or_else(|| CertifyError::TraceMismatch(format!("unknown supernode {}", event.s2)))?
            .clone();
        let deltas = proj.deltas(inst);
        for r in 0..ntrees {
            match deltas[r] {
                Some(d) => {
                    if exhausted[r] || last[r].map_or(false, |prev| d < prev) {
                        ascending[r] = false;
                    }
                    last[r] = Some(d);
                }
                None => exhausted[r] = true,
            }
        }
        let finite: Vec<Rational> = deltas.iter().filter_map(|d| *d).collect();
        if let Some(&g) = finite.iter().min() {
            if global_last.map_or(false, |prev| g < prev) {
                global_ascending = false;
            }
            global_last = Some(g);
        }
        let alive1 = proj.alive(inst, &set1);
        let alive2 = proj.alive(inst, &set2);
        for &r in alive1.intersection(&alive2) {
            match deltas[r] {
                Some(d) => sums[r] += d,
                None => report.push(
                    format!("delta-defined-iter-{}", event.iteration),
                    false,
                    "infinite",
                    "finite",
                    format!("tree {r} alive on both sides but has one active piece"),
                ),
            }
        }
        let outcomes = proj.apply_merge(inst, &set1, &set2);
        for (r, unique) in outcomes {
            if !unique {
                report.push(
                    format!("unique-active-piece-iter-{}", event.iteration),
                    false,
                    "multiple active pieces in one slice",
                    "exactly one",
                    format!("tree {r}"),
                );
            }
        }
        members.apply(event)?;
    }

    for r in 0..ntrees {
        report.check_le(
            format!("delta-sum-48cost-tree-{r}"),
            sums[r],
            Rational::from_int(48) * proj.trees[r].cost,
            format!("tree cost {}", proj.trees[r].cost),
        );
        report.push(
            format!("delta-ascending-tree-{r}"),
            ascending[r],
            if ascending[r] { "ascending" } else { "descent observed" },
            "ascending",
            "per-tree minimum active distance",
        );
    }
    report.push(
        "delta-ascending-global",
        global_ascending,
        if global_ascending { "ascending" } else { "descent observed" },
        "ascending",
        "minimum over trees",
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::steiner_forest_exact;
    use crate::greedy::{gluttonous, gluttonous_contract, timed_gluttonous, TieRule};
    use crate::instance::gen_random;

    #[test]
    fn single_pair_delta_is_distance() {
        let inst = Instance::from_parts(
            vec![
                vec![Rational::ZERO, Rational::from_int(3)],
                vec![Rational::from_int(3), Rational::ZERO],
            ],
            vec![(0, 1)],
        );
        let opt = steiner_forest_exact(&inst).unwrap();
        let trace = gluttonous(&inst, &TieRule::Lex);
        let report = delta_accounting(&inst, &opt.forest, &trace).unwrap();
        assert!(report.passed(), "{:?}", report.failed_checks());
    }

    #[test]
    fn holds_for_all_greedy_variants() {
        for seed in 0..12 {
            let inst = gen_random(1 + (seed as usize % 4), 9, 6000 + seed);
            let opt = steiner_forest_exact(&inst).unwrap();
            let traces = vec![
                gluttonous(&inst, &TieRule::Lex),
                timed_gluttonous(&inst, 2, &TieRule::Lex).unwrap(),
                gluttonous_contract(&inst, &TieRule::Lex),
            ];
            for trace in traces {
                let report = delta_accounting(&inst, &opt.forest, &trace).unwrap();
                assert!(
                    report.passed(),
                    "seed {seed} alg {:?}: {:?}",
                    trace.algorithm,
                    report.failed_checks()
                );
            }
        }
    }
}
