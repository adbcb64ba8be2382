//! Two-point connection profiles, decay fits, the uniqueness probe and
//! boundary cluster multiplicity.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::unionfind::UnionFind;
use crate::error::{out_of_range, Error, Result};
use crate::graph::{FamilySpec, FiniteGraph};
use crate::rng;
use crate::stats::{linear_fit, percentile_interval, resample_indices, wilson, Z95};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauOptions {
    pub d_max: usize,
    /// Minimum distance from each pair endpoint to the boundary.
    pub buffer: usize,
    pub pairs_per_distance: usize,
    pub replicas: usize,
    pub seed: u64,
}

/// Estimated `tau_p(d)`: both endpoints open and joined by an open path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauProfile {
    pub p: f64,
    pub d: Vec<usize>,
    pub tau: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
    /// Sampled pairs per distance (each evaluated in every replica).
    pub n_pairs: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    /// `per_replica[r][i]`: connected pairs at `d[i]` in replica `r`.
    pub per_replica: Vec<Vec<u32>>,
}

impl TauProfile {
    /// Profile from exact values (no replica data; fits get degenerate intervals).
    pub fn from_values(p: f64, d: Vec<usize>, tau: Vec<f64>) -> Self {
        let k = d.len();
        TauProfile {
            p,
            d,
            ci: tau.iter().map(|&t| (t, t)).collect(),
            tau,
            n_pairs: vec![0; k],
            replicas: 0,
            seed: 0,
            per_replica: Vec::new(),
        }
    }

    fn tau_from(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.d.len())
            .map(|i| {
                let hits: u64 = idx.iter().map(|&r| self.per_replica[r][i] as u64).sum();
                hits as f64 / (self.n_pairs[i] * idx.len()).max(1) as f64
            })
            .collect()
    }
}

/// Pairs at exact distance `d`, both endpoints in the bulk.
pub fn sample_pairs(g: &FiniteGraph, d_max: usize, buffer: usize, per_distance: usize, seed: u64) -> Result<Vec<Vec<(usize, usize)>>> {
    if buffer < d_max {
        return Err(out_of_range(format!("buffer {buffer} must be >= d_max {d_max}")));
    }
    let n = g.n_vertices();
    let in_bulk: Vec<bool> = if g.boundary().is_empty() {
        vec![true; n]
    } else {
        g.multi_source_distances(g.boundary().iter().copied()).iter().map(|&x| x as usize >= buffer).collect()
    };
    let bulk: Vec<usize> = (0..n).filter(|&v| in_bulk[v]).collect();
    if bulk.is_empty() {
        return Err(Error::InsufficientBulk(format!("no vertex lies {buffer} or more from the boundary")));
    }
    let mut rng = rng::stream(seed, "tau-pairs", 0);
    let mut stamp = vec![u32::MAX; n];
    let mut dist = vec![0usize; n];
    let mut epoch = 0u32;
    let mut out = Vec::with_capacity(d_max + 1);
    for d in 0..=d_max {
        let mut pairs = Vec::with_capacity(per_distance);
        let mut failures = 0;
        while pairs.len() < per_distance {
            let x = bulk[rng.gen_range(0..bulk.len())];
            epoch += 1;
            let mut sphere = Vec::new();
            let mut queue = VecDeque::from([x]);
            stamp[x] = epoch;
            dist[x] = 0;
            while let Some(u) = queue.pop_front() {
                if dist[u] == d {
                    if in_bulk[u] {
                        sphere.push(u);
                    }
                    continue;
                }
                for &w in g.neighbors(u) {
                    let w = w as usize;
                    if stamp[w] != epoch {
                        stamp[w] = epoch;
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            if sphere.is_empty() {
                failures += 1;
                if failures > 64 + 4 * per_distance {
                    return Err(Error::InsufficientBulk(format!("no bulk pairs at distance {d}")));
                }
                continue;
            }
            pairs.push((x, sphere[rng.gen_range(0..sphere.len())]));
        }
        out.push(pairs);
    }
    Ok(out)
}

/// Connection profiles at every `p` in `p_grid`, all from one set of pairs
/// and one coupled family of configurations per replica: site `v` is open
/// at `p` iff `U_v < p`.
pub fn connection_profiles(g: &FiniteGraph, p_grid: &[f64], opts: &TauOptions) -> Result<Vec<TauProfile>> {
    if opts.replicas == 0 || opts.pairs_per_distance == 0 {
        return Err(out_of_range("replicas and pairs_per_distance must be >= 1"));
    }
    if let Some(&p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(out_of_range(format!("p = {p} outside [0, 1]")));
    }
    let pairs = sample_pairs(g, opts.d_max, opts.buffer, opts.pairs_per_distance, opts.seed)?;
    let n = g.n_vertices();
    let mut order: Vec<usize> = (0..p_grid.len()).collect();
    order.sort_by(|&a, &b| p_grid[a].total_cmp(&p_grid[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| p_grid[i]).collect();

    // counts[r][grid index][d]
    let counts: Vec<Vec<Vec<u32>>> = (0..opts.replicas)
        .into_par_iter()
        .map_init(
            || (UnionFind::new(n), vec![false; n], vec![Vec::<u32>::new(); sorted.len() + 1]),
            |(uf, open, buckets), r| {
                let mut rng = rng::stream(opts.seed, "tau", r as u64);
                uf.reset();
                open.fill(false);
                for b in buckets.iter_mut() {
                    b.clear();
                }
                // bucket j holds sites opening between sorted[j-1] and sorted[j]
                for v in 0..n {
                    let u: f64 = rng.gen();
                    let j = sorted.partition_point(|&p| p <= u);
                    buckets[j].push(v as u32);
                }
                let mut res = vec![vec![0u32; opts.d_max + 1]; sorted.len()];
                for (j, row) in res.iter_mut().enumerate() {
                    for &v in &buckets[j] {
                        let v = v as usize;
                        open[v] = true;
                        for &w in g.neighbors(v) {
                            if open[w as usize] {
                                uf.union(v, w as usize);
                            }
                        }
                    }
                    for (d, list) in pairs.iter().enumerate() {
                        row[d] = list.iter().filter(|&&(a, b)| open[a] && open[b] && uf.connected(a, b)).count() as u32;
                    }
                }
                res
            },
        )
        .collect();

    let mut profiles: Vec<Option<TauProfile>> = vec![None; p_grid.len()];
    for (j, &gi) in order.iter().enumerate() {
        let per_replica: Vec<Vec<u32>> = counts.iter().map(|c| c[j].clone()).collect();
        let n_pairs: Vec<usize> = pairs.iter().map(Vec::len).collect();
        let total = (opts.replicas * opts.pairs_per_distance) as f64;
        let mut tau = Vec::with_capacity(opts.d_max + 1);
        let mut ci = Vec::with_capacity(opts.d_max + 1);
        for d in 0..=opts.d_max {
            let hits: u64 = per_replica.iter().map(|row| row[d] as u64).sum();
            tau.push(hits as f64 / total);
            ci.push(wilson(hits as f64, total, Z95));
        }
        profiles[gi] = Some(TauProfile {
            p: p_grid[gi],
            d: (0..=opts.d_max).collect(),
            tau,
            ci,
            n_pairs,
            replicas: opts.replicas,
            seed: opts.seed,
            per_replica,
        });
    }
    Ok(profiles.into_iter().map(|p| p.expect("every grid point filled")).collect())
}

pub fn connection_profile(g: &FiniteGraph, p: f64, opts: &TauOptions) -> Result<TauProfile> {
    Ok(connection_profiles(g, &[p], opts)?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` when `log tau` is constant.
    pub r2: Option<f64>,
    pub slope_ci: (f64, f64),
    pub distances: Vec<usize>,
}

const BOOTSTRAP: usize = 200;

/// Least-squares fit of `log tau` against `d` over every distance with a positive estimate.
pub fn decay_rate_fit(t: &TauProfile) -> Result<DecayFit> {
    decay_rate_fit_window(t, 0, usize::MAX)
}

/// As [`decay_rate_fit`], restricted to `lo <= d <= hi`.
pub fn decay_rate_fit_window(t: &TauProfile, lo: usize, hi: usize) -> Result<DecayFit> {
    let window: Vec<usize> = (0..t.d.len()).filter(|&i| (lo..=hi).contains(&t.d[i])).collect();
    let usable: Vec<usize> = window.iter().copied().filter(|&i| t.tau[i] > 0.0).collect();
    if usable.is_empty() {
        return Err(Error::AllZeroProfile);
    }
    if usable.len() < 4 {
        return Err(out_of_range(format!("decay fit needs 4 distances with tau > 0, have {}", usable.len())));
    }
    let fit_on = |tau: &[f64]| {
        let (x, y): (Vec<f64>, Vec<f64>) =
            window.iter().filter(|&&i| tau[i] > 0.0).map(|&i| (t.d[i] as f64, tau[i].ln())).unzip();
        linear_fit(&x, &y)
    };
    let f = fit_on(&t.tau).expect("at least four distinct distances");
    let slope_ci = if t.per_replica.is_empty() {
        (f.slope, f.slope)
    } else {
        let mut rng = rng::stream(t.seed, "tau-boot", 0);
        let slopes: Vec<f64> = (0..BOOTSTRAP)
            .map(|_| {
                let idx = resample_indices(&mut rng, t.replicas);
                fit_on(&t.tau_from(&idx)).map_or(f64::NEG_INFINITY, |b| b.slope)
            })
            .collect();
        percentile_interval(&slopes)
    };
    Ok(DecayFit { slope: f.slope, intercept: f.intercept, r2: f.r2, slope_ci, distances: usable.iter().map(|&i| t.d[i]).collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuOptions {
    pub tau: TauOptions,
    /// Fit window `[d_max / 2, d_max]` unless overridden.
    pub window: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    pub p: f64,
    pub slope: f64,
    pub slope_ci: (f64, f64),
    pub r2: Option<f64>,
    pub mean_tau: f64,
    /// The slope interval reaches zero: decay is not detected.
    pub non_decay: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuEstimate {
    pub family: FamilySpec,
    pub size: usize,
    pub window: (usize, usize),
    pub verdicts: Vec<DecayVerdict>,
    /// Smallest grid `p` without detected decay; 1 when decay is detected everywhere.
    pub p_hat: f64,
    pub decay_everywhere: bool,
    pub label: String,
}

pub const PU_LABEL: &str = "heuristic: finite-volume decay-slope threshold";

/// Uniqueness probe: the smallest `p` on the grid at which the bootstrap
/// interval of the connection-decay slope over the window reaches zero.
pub fn estimate_pu(family: &FamilySpec, size: usize, p_grid: &[f64], opts: &PuOptions) -> Result<PuEstimate> {
    let g = family.with_size(size).build()?;
    let d_max = opts.tau.d_max;
    let window = opts.window.unwrap_or((d_max / 2, d_max));
    let profiles = connection_profiles(&g, p_grid, &opts.tau)?;
    let mut verdicts: Vec<DecayVerdict> = profiles
        .iter()
        .map(|t| {
            let in_window: Vec<f64> =
                t.d.iter().zip(&t.tau).filter(|(d, _)| (window.0..=window.1).contains(*d)).map(|(_, &x)| x).collect();
            let mean_tau = in_window.iter().sum::<f64>() / in_window.len().max(1) as f64;
            match decay_rate_fit_window(t, window.0, window.1) {
                Ok(f) => DecayVerdict { p: t.p, slope: f.slope, slope_ci: f.slope_ci, r2: f.r2, mean_tau, non_decay: f.slope_ci.1 >= 0.0 },
                // too few connected pairs to fit: decay at this p
                Err(_) => DecayVerdict {
                    p: t.p,
                    slope: f64::NEG_INFINITY,
                    slope_ci: (f64::NEG_INFINITY, f64::NEG_INFINITY),
                    r2: None,
                    mean_tau,
                    non_decay: false,
                },
            }
        })
        .collect();
    verdicts.sort_by(|a, b| a.p.total_cmp(&b.p));
    let first = verdicts.iter().find(|v| v.non_decay).map(|v| v.p);
    Ok(PuEstimate {
        family: family.clone(),
        size,
        window,
        p_hat: first.unwrap_or(1.0),
        decay_everywhere: first.is_none(),
        verdicts,
        label: PU_LABEL.to_string(),
    })
}

/// Number of open clusters that touch the boundary and have at least `s_min` sites.
pub fn count_boundary_clusters(g: &FiniteGraph, open: &[bool], s_min: usize) -> usize {
    let n = g.n_vertices();
    let mut uf = UnionFind::new(n);
    for v in (0..n).filter(|&v| open[v]) {
        for &w in g.neighbors(v) {
            if open[w as usize] {
                uf.union(v, w as usize);
            }
        }
    }
    let mut roots: Vec<usize> = g.boundary().iter().filter(|&&b| open[b]).map(|&b| uf.find(b)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.into_iter().filter(|&r| uf.set_size(r) >= s_min).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCounts {
    pub p: f64,
    pub s_min: usize,
    /// Per replica, in index order.
    pub counts: Vec<usize>,
    pub histogram: BTreeMap<usize, usize>,
    pub seed: u64,
}

/// Empirical distribution of the number of large boundary-touching clusters.
pub fn boundary_cluster_count(g: &FiniteGraph, p: f64, s_min: usize, replicas: usize, seed: u64) -> Result<ClusterCounts> {
    if g.boundary().is_empty() {
        return Err(Error::EmptyBoundary);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(out_of_range(format!("p = {p} outside [0, 1]")));
    }
    let counts: Vec<usize> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, "clusters", r as u64);
            let open: Vec<bool> = (0..g.n_vertices()).map(|_| rng.gen::<f64>() < p).collect();
            count_boundary_clusters(g, &open, s_min)
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for &c in &counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    Ok(ClusterCounts { p, s_min, counts, histogram, seed })
}
