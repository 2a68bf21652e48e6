use proptest::prelude::*;
use rdcn::analytics::{
    buffer_requirement, delay_estimate, log_base, optimal_degree_buffer, optimal_degree_delay, per_node_buffer,
    unconstrained_theta,
};
use rdcn::lambert::{lambert_w, Branch, BRANCH_POINT};
use rdcn::periodic::{temporal_path_delay, TemporalPath};
use rdcn::{Edge, Error};

/// Raw delay curve without the period-one shortcut.
fn delay_curve(d: usize, nt: usize, nu: usize, delta: f64) -> f64 {
    2.0 * (nt as f64).ln() / (d as f64).ln() * d as f64 * delta / nu as f64
}

proptest! {
    #[test]
    fn lambert_residual_principal(x in BRANCH_POINT..2.0f64) {
        let w = lambert_w(Branch::Principal, x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-12, "x={x} w={w}");
        prop_assert!(w >= -1.0 - 1e-6);
    }

    #[test]
    fn lambert_residual_minus_one(x in BRANCH_POINT..0.0f64) {
        let w = lambert_w(Branch::MinusOne, x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-12, "x={x} w={w}");
        prop_assert!(w <= -1.0 + 1e-6);
    }

    #[test]
    fn delay_solver_matches_scan(nt in 4usize..=256, nu in 1usize..=4, slots in 1.0f64..60.0) {
        let delta = 1e-4;
        let latency = slots * delta;
        let scan = (2..=nt)
            .rev()
            .filter(|d| d % nu == 0)
            .find(|&d| delay_curve(d, nt, nu, delta) <= latency);
        match (optimal_degree_delay(nt, nu, delta, latency), scan) {
            (Ok(d), Some(s)) => prop_assert_eq!(d, s),
            (Err(Error::InfeasibleDelay(_)), None) => {}
            (got, want) => prop_assert!(false, "solver {got:?}, scan {want:?}"),
        }
    }

    #[test]
    fn delay_solver_monotone_in_latency(nt in 4usize..=128, nu in 1usize..=4, a in 1.0f64..40.0, b in 1.0f64..40.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if let Ok(d_lo) = optimal_degree_delay(nt, nu, 1e-4, lo * 1e-4) {
            let d_hi = optimal_degree_delay(nt, nu, 1e-4, hi * 1e-4).unwrap();
            prop_assert!(d_hi >= d_lo);
        }
    }

    #[test]
    fn buffer_solver_is_largest_fit(nt in 2usize..=128, nu in 1usize..=4, slots in 1.0f64..200.0) {
        let (c, delta) = (400e9, 1e-4);
        let buffer = slots * c * delta;
        match optimal_degree_buffer(buffer, c, delta, nt, nu) {
            Ok(d) => {
                prop_assert_eq!(d % nu, 0);
                prop_assert!(d >= 2 && d <= nt);
                prop_assert!(per_node_buffer(d, c, delta) <= buffer.max(2.0 * c * delta) * (1.0 + 1e-12));
                let next = d + nu;
                prop_assert!(next > nt || per_node_buffer(next, c, delta) > buffer);
                let more = optimal_degree_buffer(buffer * 1.5, c, delta, nt, nu).unwrap();
                prop_assert!(more >= d);
            }
            Err(Error::InfeasibleBuffer(_)) => prop_assert!(nu > (slots.floor() as usize).min(nt).max(2)),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn theta_grows_with_degree(nt in 3usize..=512, d in 2usize..=511) {
        prop_assume!(d < nt);
        prop_assert!(unconstrained_theta(d + 1, nt).unwrap() > unconstrained_theta(d, nt).unwrap());
    }

    #[test]
    fn per_node_buffer_is_network_requirement_per_node(nt in 4usize..=256, nu in 1usize..=4, k in 1usize..=16) {
        let (c, delta) = (100e9, 1e-5);
        let d = (nu * k).clamp(2, nt);
        prop_assume!(d % nu == 0);
        let theta = unconstrained_theta(d, nt).unwrap();
        let period = d as f64 / nu as f64;
        let ard = 2.0 * log_base(d, nt) * period * delta;
        let total = buffer_requirement(theta, nt as f64 * nu as f64 * c, ard);
        let per = per_node_buffer(d, c, delta);
        prop_assert!((total / nt as f64 - per).abs() <= 1e-9 * per);
        if d > nu {
            prop_assert!((delay_estimate(d, nt, nu, delta) - ard).abs() <= 1e-12);
        }
    }

    #[test]
    fn path_delay_at_most_hops_times_period(period in 1u64..=8, gaps in prop::collection::vec(1u64..=8, 0..6), start in 0u64..8) {
        let gaps: Vec<u64> = gaps.into_iter().map(|g| g.min(period)).collect();
        let mut t = start % period;
        let mut hops = vec![(Edge::new(0, 1), t)];
        for (i, g) in gaps.iter().enumerate() {
            t += g;
            hops.push((Edge::new(i + 1, i + 2), t));
        }
        let n = hops.len() as f64;
        let p = TemporalPath::new(hops);
        let delay = temporal_path_delay(&p, 1.0, period as usize).unwrap();
        let full = n * period as f64;
        prop_assert!(delay <= full + 1e-12);
        if gaps.iter().all(|&g| g == period) {
            prop_assert!((delay - full).abs() < 1e-12);
        } else {
            prop_assert!(delay < full);
        }
    }
}

#[test]
fn lambert_residual_on_ten_thousand_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let x = rng.random_range(BRANCH_POINT..0.0);
        for b in [Branch::Principal, Branch::MinusOne] {
            let w = lambert_w(b, x).unwrap();
            worst = worst.max((w * w.exp() - x).abs());
        }
    }
    assert!(worst <= 1e-12, "worst residual {worst}");
}
