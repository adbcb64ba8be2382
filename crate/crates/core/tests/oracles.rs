//! Closed-form and exhaustive checks for the estimators.

use bslab::graph::generators::{canopy, grid_box, half_line, tree_ball};
use bslab::percolation::{canonical_curve, estimate_theta, exhaustive_microcanonical, nz_sweep};
use bslab::walk::{escape_probability_exact, escape_probability_mc, harmonic_potential, EscapeMethod};

/// Site-percolation `theta` on a `d`-regular tree ball of radius `n` by the
/// series-parallel recursion over depth.
fn tree_theta(d: usize, n: usize, p: f64) -> f64 {
    if n == 0 {
        return p;
    }
    let mut reach = p;
    for _ in 1..n {
        reach = p * (1.0 - (1.0 - reach).powi(d as i32 - 1));
    }
    p * (1.0 - (1.0 - reach).powi(d as i32))
}

#[test]
fn exhaustive_tree_matches_recursion() {
    let g = tree_ball(3, 2).unwrap();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let curve = canonical_curve(&exhaustive_microcanonical(&g, &[]).unwrap(), &grid).unwrap();
    for (p, t) in grid.iter().zip(&curve.theta) {
        assert!((t - tree_theta(3, 2, *p)).abs() < 1e-12, "p = {p}");
    }
}

#[test]
fn sampled_tree_theta_within_interval() {
    let g = tree_ball(3, 6).unwrap();
    let grid = [0.4, 0.5, 0.6, 0.7, 0.8];
    let curve = estimate_theta(&g, &grid, 20_000, 3).unwrap();
    for (i, &p) in grid.iter().enumerate() {
        let exact = tree_theta(3, 6, p);
        let (lo, hi) = curve.theta_ci[i];
        // the Wilson interval at 95%, widened a little for the grid-wide check
        let slack = 0.5 * (hi - lo);
        assert!(exact > lo - slack && exact < hi + slack, "p = {p}: {exact} vs ({lo}, {hi})");
    }
}

#[test]
fn path_theta_is_a_power() {
    for len in [1, 4, 9] {
        let g = half_line(len).unwrap();
        let grid = [0.1, 0.5, 0.9];
        let curve = canonical_curve(&exhaustive_microcanonical(&g, &[]).unwrap(), &grid).unwrap();
        for (p, t) in grid.iter().zip(&curve.theta) {
            assert!((t - p.powi(len as i32 + 1)).abs() < 1e-12);
        }
    }
}

#[test]
fn full_occupancy_joins_everything() {
    let g = grid_box(&[30, 30], false).unwrap();
    let micro = nz_sweep(&g, 1, 4).unwrap();
    assert_eq!(micro.largest[g.n_vertices()], g.n_vertices() as f64);
    assert_eq!(micro.root_boundary[g.n_vertices()], 1.0);
    assert_eq!(micro.root_boundary[0], 0.0);
}

#[test]
fn escape_on_paths_is_reciprocal_length() {
    for len in [1, 3, 20, 200] {
        let e = escape_probability_exact(&half_line(len).unwrap()).unwrap();
        assert!((e.escape - 1.0 / len as f64).abs() < 1e-10);
        let EscapeMethod::Exact { residual, .. } = e.method else { panic!("exact method expected") };
        assert!(residual < 1e-10);
    }
}

#[test]
fn escape_on_tree_ball() {
    // from the root every step moves outward with probability (d-1)/d except the
    // first, so escape from radius 2 in T_3 is 2/3
    let e = escape_probability_exact(&tree_ball(3, 2).unwrap()).unwrap();
    assert!((e.escape - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn harmonic_potential_is_harmonic() {
    for g in [canopy(3, 6).unwrap(), grid_box(&[21, 21], false).unwrap(), tree_ball(4, 4).unwrap()] {
        let (h, residual, _) = harmonic_potential(&g).unwrap();
        assert!(residual < 1e-10);
        for v in 0..g.n_vertices() {
            if v == g.root() || g.is_boundary(v) || h[v] == 0.0 {
                continue;
            }
            let avg: f64 = g.neighbors(v).iter().map(|&u| h[u as usize]).sum::<f64>() / g.degree(v) as f64;
            assert!((avg - h[v]).abs() < 1e-9, "vertex {v}");
        }
    }
}

#[test]
fn monte_carlo_escape_agrees_on_tree() {
    let g = tree_ball(3, 3).unwrap();
    let exact = escape_probability_exact(&g).unwrap().escape;
    let mc = escape_probability_mc(&g, 20_000, 9).unwrap();
    let sd = (exact * (1.0 - exact) / 20_000.0).sqrt();
    assert!((mc.escape - exact).abs() < 4.0 * sd);
}
