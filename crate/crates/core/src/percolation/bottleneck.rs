//! Root-to-boundary connection thresholds by bottleneck (invasion) search.
//!
//! With i.i.d. uniform site labels `U_v`, the root is joined to the boundary
//! by sites with `U < p` exactly when `p` exceeds the minimax value
//! `min over root-boundary paths of max U along the path`. Invading from the
//! root in increasing `U` order finds that value after touching only the
//! invaded region, and one sample answers the question for every `p`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{out_of_range, Error, Result};
use crate::graph::FiniteGraph;
use crate::rng;

/// Lazily evaluated uniform label of each site, drawn from a fixed position
/// of a per-replica ChaCha stream so the value does not depend on visit order.
struct SiteLabels {
    rng: ChaCha8Rng,
}

impl SiteLabels {
    fn new(seed: u64) -> Self {
        SiteLabels { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// 53-bit integer label; `label / 2^53` is uniform on `[0, 1)`.
    fn key(&mut self, v: usize) -> u64 {
        self.rng.set_word_pos(2 * v as u128);
        self.rng.next_u64() >> 11
    }
}

const SCALE: f64 = 1.0 / (1u64 << 53) as f64;

struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Reverse<(u64, u32)>>,
}

/// Sentinel for vertices on no shell.
pub const NO_SHELL: u32 = u32::MAX;

/// Invade from the root until shell `n_shells - 1` is reached, recording for
/// every shell the minimax label at its first contact.
fn invade(g: &FiniteGraph, labels: &mut SiteLabels, shell_of: &[u32], n_shells: usize, s: &mut Scratch) -> Vec<u64> {
    s.epoch = s.epoch.wrapping_add(1);
    if s.epoch == 0 {
        s.stamp.fill(0);
        s.epoch = 1;
    }
    s.heap.clear();
    let mut hit = vec![u64::MAX; n_shells];
    let last = n_shells - 1;
    let root = g.root();
    s.stamp[root] = s.epoch;
    s.heap.push(Reverse((labels.key(root), root as u32)));
    let mut level = 0u64;
    while let Some(Reverse((key, v))) = s.heap.pop() {
        level = level.max(key);
        let v = v as usize;
        let sh = shell_of[v];
        if sh != NO_SHELL && hit[sh as usize] == u64::MAX {
            hit[sh as usize] = level;
            if sh as usize == last {
                break;
            }
        }
        for &w in g.neighbors(v) {
            let w = w as usize;
            if s.stamp[w] != s.epoch {
                s.stamp[w] = s.epoch;
                s.heap.push(Reverse((labels.key(w), w as u32)));
            }
        }
    }
    hit
}

/// Per replica (in index order), the smallest `p` at which the root is
/// joined to the boundary. Replica `r` uses stream `("bottleneck", r)`.
pub fn root_boundary_thresholds(g: &FiniteGraph, replicas: usize, seed: u64) -> Result<Vec<f64>> {
    if g.boundary().is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let shell_of: Vec<u32> = g.boundary_mask().iter().map(|&b| if b { 0 } else { NO_SHELL }).collect();
    Ok(shell_thresholds(g, &shell_of, 1, replicas, seed)?.remove(0))
}

/// Thresholds for several target shells at once: `shell_of[v]` names the
/// shell containing `v`, and shell `n_shells - 1` must be reachable. Result
/// `[shell][replica]`; shells never reached before the last one get `1`.
pub fn shell_thresholds(g: &FiniteGraph, shell_of: &[u32], n_shells: usize, replicas: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if replicas == 0 {
        return Err(out_of_range("replicas must be >= 1"));
    }
    if n_shells == 0 || shell_of.len() != g.n_vertices() {
        return Err(out_of_range("shell map must cover every vertex and name at least one shell"));
    }
    let last = (n_shells - 1) as u32;
    if !shell_of.contains(&last) {
        return Err(Error::EmptyBoundary);
    }
    let n = g.n_vertices();
    let per_replica: Vec<Vec<u64>> = (0..replicas)
        .into_par_iter()
        .map_init(
            || Scratch { stamp: vec![0; n], epoch: 0, heap: BinaryHeap::new() },
            |s, r| {
                let mut labels = SiteLabels::new(rng::derive_seed(seed, "bottleneck", r as u64));
                invade(g, &mut labels, shell_of, n_shells, s)
            },
        )
        .collect();
    // a site is open at p iff key / 2^53 < p, so the event needs p >= (key + 1) / 2^53
    Ok((0..n_shells)
        .map(|k| {
            per_replica
                .iter()
                .map(|h| if h[k] == u64::MAX { 1.0 } else { (h[k] as f64 + 1.0) * SCALE })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{half_line, tree_ball};

    #[test]
    fn path_threshold_is_max_label() {
        // on a path the only route uses every site, so P(threshold <= p) = p^(L+1)
        let g = half_line(3).unwrap();
        let t = root_boundary_thresholds(&g, 40_000, 5).unwrap();
        let frac = t.iter().filter(|&&x| x <= 0.5).count() as f64 / t.len() as f64;
        assert!((frac - 0.0625).abs() < 0.005, "{frac}");
    }

    #[test]
    fn nested_shells_match_separate_balls() {
        // depth-m sphere of a big ball is the boundary of the radius-m ball
        let big = tree_ball(3, 8).unwrap();
        let depth = big.distances_from(big.root());
        let shell_of: Vec<u32> = depth.iter().map(|&d| if d == 4 || d == 8 { d / 4 - 1 } else { NO_SHELL }).collect();
        let t = shell_thresholds(&big, &shell_of, 2, 20_000, 3).unwrap();
        let small = root_boundary_thresholds(&tree_ball(3, 4).unwrap(), 20_000, 4).unwrap();
        let frac = |v: &[f64]| v.iter().filter(|&&x| x <= 0.6).count() as f64 / v.len() as f64;
        assert!((frac(&t[0]) - frac(&small)).abs() < 0.02);
        assert!(t[0].iter().zip(&t[1]).all(|(a, b)| a <= b));
    }

    #[test]
    fn deterministic_and_order_free() {
        let g = tree_ball(3, 6).unwrap();
        let a = root_boundary_thresholds(&g, 64, 11).unwrap();
        let b = root_boundary_thresholds(&g, 64, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x > 0.0 && x <= 1.0));
    }
}
