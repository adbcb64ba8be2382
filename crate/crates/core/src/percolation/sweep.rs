//! Newman-Ziff occupation sweeps and their binomial convolution.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::unionfind::UnionFind;
use crate::error::{out_of_range, Error, Result};
use crate::graph::FiniteGraph;
use crate::rng;
use crate::stats::{wilson, Z95};

/// Per-occupancy averages over replicas. Index `k` is the number of open sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrocanonicalCurve {
    pub n_sites: usize,
    pub replicas: usize,
    /// Mean largest open cluster; empty when not tracked.
    pub largest: Vec<f64>,
    /// Fraction of replicas with the root open and joined to an open boundary site.
    pub root_boundary: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// `pair_connected[i][k]`: both ends of pair `i` open and connected.
    pub pair_connected: Vec<Vec<f64>>,
    /// Per replica (index order), the occupancy at which the root first
    /// reaches the boundary. Empty for exhaustive curves.
    pub root_onsets: Vec<usize>,
}

/// What a sweep records besides the root-boundary onset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOptions {
    pub track_largest: bool,
    pub pairs: Vec<(usize, usize)>,
}

struct ReplicaOutcome {
    largest: Vec<u32>,
    root_onset: usize,
    pair_onsets: Vec<usize>,
}

/// Random-order site insertion for a single replica.
fn sweep_once(g: &FiniteGraph, order: &[u32], opts: &SweepOptions, uf: &mut UnionFind) -> ReplicaOutcome {
    let n = g.n_vertices();
    uf.reset();
    for &b in g.boundary() {
        uf.mark_touching(b);
    }
    let mut open = vec![false; n];
    let mut largest = if opts.track_largest { Vec::with_capacity(n + 1) } else { Vec::new() };
    if opts.track_largest {
        largest.push(0);
    }
    let root = g.root();
    let mut root_onset = n + 1;
    let mut pair_onsets = vec![n + 1; opts.pairs.len()];
    let mut pending = opts.pairs.len();
    let mut big = 0u32;
    for (i, &v) in order.iter().enumerate() {
        let v = v as usize;
        let k = i + 1;
        open[v] = true;
        for &w in g.neighbors(v) {
            if open[w as usize] {
                uf.union(v, w as usize);
            }
        }
        if opts.track_largest {
            big = big.max(uf.set_size(v) as u32);
            largest.push(big);
        }
        if root_onset > n && open[root] && uf.touches(root) {
            root_onset = k;
        }
        if pending > 0 {
            for (j, &(a, b)) in opts.pairs.iter().enumerate() {
                if pair_onsets[j] > n && open[a] && open[b] && uf.connected(a, b) {
                    pair_onsets[j] = k;
                    pending -= 1;
                }
            }
        }
    }
    ReplicaOutcome { largest, root_onset, pair_onsets }
}

/// Fraction of onsets at or below each occupancy `0..=n`.
pub fn onset_fractions(onsets: &[usize], n: usize) -> Vec<f64> {
    let mut hist = vec![0u64; n + 2];
    for &o in onsets {
        hist[o.min(n + 1)] += 1;
    }
    let total = onsets.len().max(1) as f64;
    let mut acc = 0u64;
    (0..=n)
        .map(|k| {
            acc += hist[k];
            acc as f64 / total
        })
        .collect()
}

/// Newman-Ziff sweep: each replica inserts the sites in a uniformly random
/// order drawn from stream `("nz", replica)` and records observables after
/// every insertion.
pub fn nz_sweep(g: &FiniteGraph, seed: u64, replicas: usize) -> Result<MicrocanonicalCurve> {
    nz_sweep_with(g, seed, replicas, &SweepOptions { track_largest: true, pairs: Vec::new() })
}

pub fn nz_sweep_with(g: &FiniteGraph, seed: u64, replicas: usize, opts: &SweepOptions) -> Result<MicrocanonicalCurve> {
    if replicas == 0 {
        return Err(out_of_range("replicas must be >= 1"));
    }
    for &(a, b) in &opts.pairs {
        g.check_vertex(a)?;
        g.check_vertex(b)?;
    }
    let n = g.n_vertices();

    struct Acc {
        largest: Vec<u64>,
        root: Vec<(usize, usize)>,
        pairs: Vec<Vec<usize>>,
    }
    let new_acc = || Acc {
        largest: if opts.track_largest { vec![0; n + 1] } else { Vec::new() },
        root: Vec::new(),
        pairs: vec![Vec::new(); opts.pairs.len()],
    };
    // integer sums keep the result independent of how replicas are split
    let acc = (0..replicas)
        .into_par_iter()
        .fold(
            || (new_acc(), UnionFind::new(n), (0..n as u32).collect::<Vec<u32>>()),
            |(mut acc, mut uf, mut order), r| {
                for (i, x) in order.iter_mut().enumerate() {
                    *x = i as u32;
                }
                let mut rng = rng::stream(seed, "nz", r as u64);
                order.shuffle(&mut rng);
                let out = sweep_once(g, &order, opts, &mut uf);
                for (s, &l) in acc.largest.iter_mut().zip(&out.largest) {
                    *s += l as u64;
                }
                acc.root.push((r, out.root_onset));
                for (list, &o) in acc.pairs.iter_mut().zip(&out.pair_onsets) {
                    list.push(o);
                }
                (acc, uf, order)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(new_acc, |mut a, b| {
            for (s, t) in a.largest.iter_mut().zip(&b.largest) {
                *s += t;
            }
            a.root.extend(b.root);
            for (x, y) in a.pairs.iter_mut().zip(b.pairs) {
                x.extend(y);
            }
            a
        });
    let mut root = acc.root;
    root.sort_unstable();
    let root_onsets: Vec<usize> = root.into_iter().map(|(_, o)| o).collect();
    let rf = replicas as f64;
    Ok(MicrocanonicalCurve {
        n_sites: n,
        replicas,
        largest: acc.largest.iter().map(|&s| s as f64 / rf).collect(),
        root_boundary: onset_fractions(&root_onsets, n),
        pairs: opts.pairs.clone(),
        pair_connected: acc.pairs.iter().map(|o| onset_fractions(o, n)).collect(),
        root_onsets,
    })
}

/// Exact microcanonical averages by enumerating every subset of sites
/// (at most 24 sites).
pub fn exhaustive_microcanonical(g: &FiniteGraph, pairs: &[(usize, usize)]) -> Result<MicrocanonicalCurve> {
    let n = g.n_vertices();
    if n > 24 {
        return Err(out_of_range(format!("exhaustive enumeration needs <= 24 sites, got {n}")));
    }
    let mut largest = vec![0.0; n + 1];
    let mut root_boundary = vec![0.0; n + 1];
    let mut pair_connected = vec![vec![0.0; n + 1]; pairs.len()];
    let mut per_k = vec![0u64; n + 1];
    let mut uf = UnionFind::new(n);
    for mask in 0u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        per_k[k] += 1;
        uf.reset();
        for &b in g.boundary() {
            uf.mark_touching(b);
        }
        let open = |v: usize| mask >> v & 1 == 1;
        let mut big = 0;
        for v in (0..n).filter(|&v| open(v)) {
            for &w in g.neighbors(v) {
                if open(w as usize) {
                    uf.union(v, w as usize);
                }
            }
        }
        for v in (0..n).filter(|&v| open(v)) {
            big = big.max(uf.set_size(v));
        }
        largest[k] += big as f64;
        if open(g.root()) && uf.touches(g.root()) {
            root_boundary[k] += 1.0;
        }
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if open(a) && open(b) && uf.connected(a, b) {
                pair_connected[i][k] += 1.0;
            }
        }
    }
    for k in 0..=n {
        let c = per_k[k] as f64;
        largest[k] /= c;
        root_boundary[k] /= c;
        for row in &mut pair_connected {
            row[k] /= c;
        }
    }
    Ok(MicrocanonicalCurve {
        n_sites: n,
        replicas: 0,
        largest,
        root_boundary,
        pairs: pairs.to_vec(),
        pair_connected,
        root_onsets: Vec::new(),
    })
}

/// Binomial(N, p) weights over a window around the mode, computed in log
/// space and normalized to sum to one.
#[derive(Debug, Clone)]
pub struct Binomial {
    n: usize,
    ln_fact: Vec<f64>,
}

impl Binomial {
    /// Terms further than this below the mode (in log space) are dropped.
    const LOG_CUTOFF: f64 = 50.0;

    pub fn new(n: usize) -> Self {
        let mut ln_fact = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        ln_fact.push(0.0);
        for i in 1..=n {
            acc += (i as f64).ln();
            ln_fact.push(acc);
        }
        Binomial { n, ln_fact }
    }

    /// `(first k, weights)`.
    pub fn weights(&self, p: f64) -> (usize, Vec<f64>) {
        let n = self.n;
        if p <= 0.0 {
            return (0, vec![1.0]);
        }
        if p >= 1.0 {
            return (n, vec![1.0]);
        }
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        let logw = |k: usize| self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k] + k as f64 * lp + (n - k) as f64 * lq;
        let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
        let top = logw(mode);
        let mut lo = mode;
        while lo > 0 && logw(lo - 1) - top > -Self::LOG_CUTOFF {
            lo -= 1;
        }
        let mut hi = mode;
        while hi < n && logw(hi + 1) - top > -Self::LOG_CUTOFF {
            hi += 1;
        }
        let mut w: Vec<f64> = (lo..=hi).map(|k| (logw(k) - top).exp()).collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        (lo, w)
    }

    /// `sum_k B(k; N, p) q[k]`.
    pub fn mix(&self, q: &[f64], p: f64) -> f64 {
        let (lo, w) = self.weights(p);
        w.iter().zip(&q[lo..]).map(|(a, b)| a * b).sum()
    }
}

/// Fixed-`p` observables with Wilson intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCurve {
    pub p: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_ci: Vec<(f64, f64)>,
    /// Largest cluster divided by the number of sites; empty when not tracked.
    pub largest_fraction: Vec<f64>,
    pub pair_connected: Vec<Vec<f64>>,
    pub replicas: usize,
    pub n_sites: usize,
}

/// Binomial convolution of a microcanonical curve onto `p_grid`.
pub fn canonical_curve(micro: &MicrocanonicalCurve, p_grid: &[f64]) -> Result<CanonicalCurve> {
    if let Some(&p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(out_of_range(format!("p = {p} outside [0, 1]")));
    }
    let n = micro.n_sites;
    let binom = Binomial::new(n);
    let mut theta: Vec<f64> = p_grid.iter().map(|&p| binom.mix(&micro.root_boundary, p).clamp(0.0, 1.0)).collect();
    enforce_monotone(p_grid, &mut theta);
    let reps = micro.replicas as f64;
    let theta_ci = theta
        .iter()
        .map(|&t| if micro.replicas > 0 { wilson(t * reps, reps, Z95) } else { (t, t) })
        .collect();
    let largest_fraction = if micro.largest.is_empty() {
        Vec::new()
    } else {
        p_grid.iter().map(|&p| binom.mix(&micro.largest, p) / n as f64).collect()
    };
    let pair_connected = micro
        .pair_connected
        .iter()
        .map(|row| {
            let mut v: Vec<f64> = p_grid.iter().map(|&p| binom.mix(row, p).clamp(0.0, 1.0)).collect();
            enforce_monotone(p_grid, &mut v);
            v
        })
        .collect();
    Ok(CanonicalCurve { p: p_grid.to_vec(), theta, theta_ci, largest_fraction, pair_connected, replicas: micro.replicas, n_sites: n })
}

/// The convolution of a nondecreasing sequence is nondecreasing in `p`; this
/// removes the rounding-level violations left by the truncated windows.
fn enforce_monotone(p_grid: &[f64], values: &mut [f64]) {
    let mut idx: Vec<usize> = (0..p_grid.len()).collect();
    idx.sort_by(|&a, &b| p_grid[a].total_cmp(&p_grid[b]));
    let mut run = f64::NEG_INFINITY;
    for i in idx {
        run = run.max(values[i]);
        values[i] = run;
    }
}

/// Root-to-boundary connection probability on `p_grid`.
pub fn estimate_theta(g: &FiniteGraph, p_grid: &[f64], replicas: usize, seed: u64) -> Result<CanonicalCurve> {
    if g.boundary().is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let micro = nz_sweep_with(g, seed, replicas, &SweepOptions::default())?;
    canonical_curve(&micro, p_grid)
}
