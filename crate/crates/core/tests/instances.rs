//! Generator and format properties: every generated instance validates, the
//! girth construction obeys its detour property, and SFI round-trips.

use proptest::prelude::*;
use steiner_greedy::instance::{
    builtin_cubic, builtin_cubic_names, gen_girth_lb, gen_ladder, gen_random, load_str,
    to_sfi_string, GirthInstanceSpec,
};
use steiner_greedy::rational::Rational;

#[test]
fn every_builtin_girth_instance_validates() {
    for name in builtin_cubic_names() {
        let spec = GirthInstanceSpec::from_builtin(builtin_cubic(name).unwrap()).unwrap();
        let inst = gen_girth_lb(&spec).unwrap();
        assert!(inst.validate().is_ok(), "{name}");
        assert!(!inst.demands().is_empty(), "{name} has demands");
    }
}

#[test]
fn girth_detour_property() {
    // For every non-tree edge (u,v): the shortest u-v path avoiding that
    // edge has at least g-1 unit edges in the base graph, so its length
    // exceeds g/2 whenever g > 4.
    for name in builtin_cubic_names() {
        let base = builtin_cubic(name).unwrap();
        let g = base.recorded_girth;
        let spec = GirthInstanceSpec::from_builtin(base.clone()).unwrap();
        let adj = base.adjacency();
        for (u, v) in spec.non_tree_edges() {
            // BFS in the unit graph with the edge removed.
            let mut dist = vec![usize::MAX; base.n];
            dist[u] = 0;
            let mut q = std::collections::VecDeque::from([u]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if (x, y) == (u, v) || (y, x) == (u, v) {
                        continue;
                    }
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        q.push_back(y);
                    }
                }
            }
            assert!(dist[v] >= g - 1, "{name}: detour {} < girth-1", dist[v]);
            if g > 4 {
                assert!(
                    Rational::from_int(dist[v] as i128) > spec.long_edge_length,
                    "{name}: unit detour must beat the long edge"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generated_ladders_validate_and_roundtrip(n in 1usize..6, num in 1i128..20) {
        let eps = Rational::new(num, 10);
        let inst = gen_ladder(n, eps).unwrap();
        prop_assert!(inst.validate().is_ok());
        let text = to_sfi_string(&inst);
        let back = load_str(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(to_sfi_string(&back), text);
    }

    #[test]
    fn generated_random_instances_validate_and_roundtrip(k in 1usize..6, extra in 0usize..3, seed in 0u64..1000) {
        let inst = gen_random(k, 2 * k + extra, seed);
        prop_assert!(inst.validate().is_ok());
        let back = load_str(&to_sfi_string(&inst)).unwrap();
        prop_assert_eq!(back, inst);
    }
}
