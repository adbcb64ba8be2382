use proptest::prelude::*;

use bslab::contact::{coupled_sim, survival_curve};
use bslab::graph::generators::{
    canopy, cartesian_product, dl_ball, free_product_z2_edge_ball, grid_box, half_line, horocyclic_canopy_product, hyperbolic_ball,
    stretch_fiber, tree_ball,
};
use bslab::percolation::{canonical_curve, estimate_theta, exhaustive_microcanonical, nz_sweep, Binomial};
use bslab::walk::{escape_probability_exact, escape_probability_mc};
use bslab::FiniteGraph;

fn family(i: usize) -> FiniteGraph {
    match i {
        0 => tree_ball(3, 3).unwrap(),
        1 => grid_box(&[9, 9], false).unwrap(),
        2 => half_line(6).unwrap(),
        3 => canopy(3, 4).unwrap(),
        4 => cartesian_product(&canopy(3, 2).unwrap(), &half_line(3).unwrap()).unwrap(),
        5 => stretch_fiber(&cartesian_product(&canopy(3, 2).unwrap(), &half_line(2).unwrap()).unwrap(), 2).unwrap(),
        6 => dl_ball(2, 2, 2).unwrap(),
        7 => horocyclic_canopy_product(3, 2, 2).unwrap(),
        8 => free_product_z2_edge_ball(2).unwrap(),
        _ => hyperbolic_ball(7, 2).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn binomial_weights_are_a_distribution(n in 1usize..400, p in 0.0f64..=1.0) {
        let (lo, w) = Binomial::new(n).weights(p);
        prop_assert!(lo + w.len() <= n + 1);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mean: f64 = w.iter().enumerate().map(|(i, x)| (lo + i) as f64 * x).sum();
        prop_assert!((mean - n as f64 * p).abs() < 1e-6 * n as f64 + 1e-9);
    }

    #[test]
    fn theta_is_monotone_in_p(i in 0usize..10, seed in 0u64..1000) {
        let g = family(i);
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
        let c = estimate_theta(&g, &grid, 200, seed).unwrap();
        prop_assert!(c.theta.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(c.theta[0], 0.0);
        prop_assert!((c.theta[40] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn microcanonical_observables_are_nondecreasing(i in 0usize..10, seed in 0u64..1000) {
        let g = family(i);
        let m = nz_sweep(&g, seed, 20).unwrap();
        prop_assert!(m.largest.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(m.root_boundary.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sweeps_are_reproducible(i in 0usize..10, seed in 0u64..1000) {
        let g = family(i);
        prop_assert_eq!(nz_sweep(&g, seed, 8).unwrap(), nz_sweep(&g, seed, 8).unwrap());
    }

    #[test]
    fn survival_is_monotone_in_lambda(i in 0usize..4, seed in 0u64..1000) {
        let g = family(i);
        let grid: Vec<f64> = (1..=12).map(|k| k as f64 * 0.25).collect();
        let c = survival_curve(&g, &grid, 5.0, 100, seed).unwrap();
        prop_assert!(c.survival.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.boundary_touch.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn coupled_extinction_times_are_ordered(i in 0usize..10, seed in 0u64..1000) {
        let g = family(i);
        let runs = coupled_sim(&g, &[0.4, 0.9, 1.6], 2.0, &[g.root()], 8.0, seed).unwrap();
        let t = |k: usize| runs[k].extinction_time.unwrap_or(f64::INFINITY);
        prop_assert!(t(0) <= t(1) && t(1) <= t(2));
    }

    #[test]
    fn walk_monte_carlo_matches_exact(i in 0usize..10, seed in 0u64..1000) {
        let g = family(i);
        let exact = escape_probability_exact(&g).unwrap().escape;
        let reps = 3000;
        let mc = escape_probability_mc(&g, reps, seed).unwrap();
        let sd = (exact * (1.0 - exact) / reps as f64).sqrt().max(1e-3);
        // 4 sigma keeps the family-wide false-alarm rate small across cases
        prop_assert!((mc.escape - exact).abs() < 4.0 * sd, "{} vs {}", mc.escape, exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exhaustive_theta_dominates_on_subgraph_paths(len in 1usize..10, p in 0.0f64..=1.0) {
        // a longer path needs strictly more open sites
        let short = canonical_curve(&exhaustive_microcanonical(&half_line(len).unwrap(), &[]).unwrap(), &[p]).unwrap();
        let long = canonical_curve(&exhaustive_microcanonical(&half_line(len + 1).unwrap(), &[]).unwrap(), &[p]).unwrap();
        prop_assert!(long.theta[0] <= short.theta[0] + 1e-12);
    }
}
