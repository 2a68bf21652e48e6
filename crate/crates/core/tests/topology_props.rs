use proptest::prelude::*;
use rdcn::periodic::{build_periodic_graph, emulated_graph};
use rdcn::topology::{
    assign_to_switches, complete_digraph, complete_graph_schedule, debruijn_digraph, decompose_matchings,
    random_regular_expander, Digraph,
};
use rdcn::Edge;

fn sorted(mut v: Vec<Edge>) -> Vec<Edge> {
    v.sort();
    v
}

fn check_decomposition(g: &Digraph, d: usize) -> Result<(), TestCaseError> {
    let ms = decompose_matchings(g).unwrap();
    prop_assert_eq!(ms.len(), d);
    for m in &ms {
        let mut seen = vec![false; g.num_vertices()];
        for &t in m.as_slice() {
            prop_assert!(!seen[t]);
            seen[t] = true;
        }
    }
    let union: Vec<Edge> = ms.iter().flat_map(|m| m.edges()).collect();
    prop_assert_eq!(sorted(union), g.edges().to_vec());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn debruijn_decomposes_into_its_edges(nt in 2usize..=40, d in 2usize..=40) {
        prop_assume!(d <= nt);
        let g = debruijn_digraph(nt, d).unwrap();
        g.check_regular(d).unwrap();
        check_decomposition(&g, d)?;
    }

    #[test]
    fn expander_decomposes_into_its_edges(half in 3usize..=12, d in 3usize..=5, seed in 0u64..1000) {
        let nt = 2 * half;
        prop_assume!(d < nt);
        let e = random_regular_expander(nt, d, seed).unwrap();
        check_decomposition(&e.graph, d)?;
    }

    #[test]
    fn schedule_round_trips_to_the_digraph(nt in 4usize..=32, k in 1usize..=4, nu in 1usize..=4, seed in 0u64..1000) {
        let d = nu * k;
        prop_assume!(d >= 2 && d <= nt);
        let g = debruijn_digraph(nt, d).unwrap();
        let sched = assign_to_switches(&decompose_matchings(&g).unwrap(), nu, seed).unwrap();
        prop_assert_eq!(sched.len(), nu);
        prop_assert!(sched.iter().all(|s| s.len() == k));
        let pg = build_periodic_graph(nt, nu, 1e-4, 0.0, &sched, 1e9).unwrap();
        prop_assert_eq!(emulated_graph(&pg).to_digraph(), g);
    }

    #[test]
    fn complete_schedule_round_trips(k in 1usize..=8, nu in 1usize..=4) {
        let nt = k * nu;
        prop_assume!(nt >= 2);
        let sched = complete_graph_schedule(nt, nu).unwrap();
        let pg = build_periodic_graph(nt, nu, 1e-4, 0.0, &sched, 1e9).unwrap();
        prop_assert_eq!(pg.period(), k);
        prop_assert_eq!(emulated_graph(&pg).to_digraph(), complete_digraph(nt));
    }
}
