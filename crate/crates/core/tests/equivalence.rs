use proptest::prelude::*;
use rdcn::oracle::{max_concurrent_flow, max_concurrent_flow_emulated, temporal_max_flow, OracleOptions};
use rdcn::periodic::{
    build_periodic_graph, emulated_graph, flow_static_to_temporal, flow_temporal_to_static, simple_emulated_graph,
    throughput_of_static_flow, throughput_of_temporal_flow, validate_static_flow, validate_temporal_flow,
    PeriodicGraph,
};
use rdcn::{DemandMatrix, Matching};

#[derive(Debug, Clone)]
struct Instance {
    nt: usize,
    delta_r: f64,
    switches: Vec<Vec<Vec<usize>>>,
    perm: Vec<usize>,
    sparse: Vec<(usize, usize, f64)>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (3usize..=6, 1usize..=3, 1usize..=2, prop::bool::ANY).prop_flat_map(|(nt, period, nu, tax)| {
        let perm = Just((0..nt).collect::<Vec<_>>()).prop_shuffle();
        let slot = Just((0..nt).collect::<Vec<_>>()).prop_shuffle();
        let switches = prop::collection::vec(prop::collection::vec(slot, period), nu);
        let sparse = prop::collection::vec((0..nt, 0..nt, 0.1f64..2.0), 1..=nt);
        (Just(nt), Just(if tax { 0.1 } else { 0.0 }), switches, perm, sparse).prop_map(
            |(nt, delta_r, switches, perm, sparse)| Instance {
                nt,
                delta_r,
                switches,
                perm,
                sparse,
            },
        )
    })
}

impl Instance {
    fn graph(&self) -> PeriodicGraph {
        let sched: Vec<Vec<Matching>> = self
            .switches
            .iter()
            .map(|s| s.iter().map(|p| Matching::new(p.clone()).unwrap()).collect())
            .collect();
        build_periodic_graph(self.nt, sched.len(), 1.0, self.delta_r, &sched, 10.0).unwrap()
    }

    /// Permutation, all-to-all and a random sparse matrix; the first two are
    /// skipped when they carry no demand.
    fn demands(&self) -> Vec<DemandMatrix> {
        let mut out = Vec::new();
        let p = DemandMatrix::permutation(&self.perm, 10.0);
        if p.total() > 0.0 {
            out.push(p);
        }
        out.push(DemandMatrix::all_to_all(self.nt, 10.0));
        let mut m = DemandMatrix::zeros(self.nt);
        for &(s, d, r) in &self.sparse {
            if s != d {
                m.set(s, d, m.get(s, d) + r);
            }
        }
        if m.total() > 0.0 {
            out.push(m);
        }
        out
    }
}

fn opts(nt: usize) -> OracleOptions {
    OracleOptions {
        hop_cap: Some(nt - 1),
        ..OracleOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn temporal_and_emulated_throughput_agree(inst in instance()) {
        let g = inst.graph();
        let o = opts(inst.nt);
        let e = emulated_graph(&g);
        let simple = simple_emulated_graph(&g);
        for m in inst.demands() {
            let t = temporal_max_flow(&g, &m, &o).unwrap();
            let s = max_concurrent_flow_emulated(&e, &m, &o).unwrap();
            let c = max_concurrent_flow(&simple, &m, &o).unwrap();
            prop_assert!((t.theta - s.theta).abs() <= 1e-6, "temporal {} vs emulated {}", t.theta, s.theta);
            prop_assert!((c.theta - s.theta).abs() <= 1e-6, "collapsed {} vs labelled {}", c.theta, s.theta);
        }
    }

    #[test]
    fn witnesses_convert_both_ways(inst in instance()) {
        let g = inst.graph();
        let o = opts(inst.nt);
        let e = emulated_graph(&g);
        for m in inst.demands() {
            let t = temporal_max_flow(&g, &m, &o).unwrap();
            if t.theta <= 0.0 {
                continue;
            }
            let tf = t.temporal_flow().unwrap();
            prop_assert!(validate_temporal_flow(&tf, &g).is_empty());
            let sf = flow_temporal_to_static(&tf, &g).unwrap();
            validate_static_flow(&sf, &e).unwrap();
            let back = flow_static_to_temporal(&sf, &g).unwrap();
            prop_assert!(validate_temporal_flow(&back, &g).is_empty());
            let th_t = throughput_of_temporal_flow(&tf, &g, &m).unwrap();
            let th_s = throughput_of_static_flow(&sf, &m).unwrap();
            let th_b = throughput_of_temporal_flow(&back, &g, &m).unwrap();
            prop_assert!((th_t - t.theta).abs() <= 1e-6 * t.theta.max(1.0));
            prop_assert!((th_s - th_t).abs() <= 1e-9 * th_t.max(1.0));
            prop_assert!((th_b - th_t).abs() <= 1e-9 * th_t.max(1.0));

            let s = max_concurrent_flow_emulated(&e, &m, &o).unwrap();
            let sf = s.static_flow(g.period()).unwrap().unwrap();
            let tf = flow_static_to_temporal(&sf, &g).unwrap();
            prop_assert!(validate_temporal_flow(&tf, &g).is_empty());
            let th = throughput_of_temporal_flow(&tf, &g, &m).unwrap();
            prop_assert!((th - s.theta).abs() <= 1e-6 * s.theta.max(1.0));
        }
    }

    #[test]
    fn throughput_respects_route_length_bound(inst in instance()) {
        let g = inst.graph();
        let o = opts(inst.nt);
        let simple = simple_emulated_graph(&g);
        let usable: f64 = simple.edges().filter(|(e, _)| !e.is_self_loop()).map(|(_, c)| c).sum();
        for m in inst.demands() {
            for r in [temporal_max_flow(&g, &m, &o).unwrap(), max_concurrent_flow(&simple, &m, &o).unwrap()] {
                if r.theta > 0.0 {
                    let bound = usable / (m.total() * r.arl);
                    prop_assert!(r.theta <= bound + 1e-6, "{} > {}", r.theta, bound);
                }
            }
        }
    }
}
