//! Simple random walk escape probabilities: the chance that a walk started at
//! the root reaches the boundary before returning to the root.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::graph::{FamilySpec, FiniteGraph};
use crate::rng;
use crate::stats::{linear_fit, wilson, Z95};

/// Tolerance on the harmonic residual `max_v |h(v) - mean_{w~v} h(w)|`.
pub const RESIDUAL_TOL: f64 = 1e-10;

pub const TRANSIENCE_LABEL: &str = "heuristic: finite-truncation escape trend";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EscapeMethod {
    Exact { residual: f64, iterations: usize },
    MonteCarlo { replicas: usize, seed: u64, ci: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeResult {
    pub escape: f64,
    pub method: EscapeMethod,
    pub n_vertices: usize,
}

impl EscapeResult {
    pub fn ci(&self) -> (f64, f64) {
        match self.method {
            EscapeMethod::Exact { .. } => (self.escape, self.escape),
            EscapeMethod::MonteCarlo { ci, .. } => ci,
        }
    }
}

fn check_walk_graph(g: &FiniteGraph) -> Result<()> {
    if g.boundary().is_empty() {
        return Err(Error::EmptyBoundary);
    }
    if g.is_boundary(g.root()) {
        return Err(out_of_range("the root lies on the boundary"));
    }
    if g.degree(g.root()) == 0 {
        return Err(out_of_range("the root is isolated"));
    }
    Ok(())
}

/// Potential `h` with `h(root) = 0`, `h = 1` on the boundary and `h` harmonic
/// at every other vertex of the root's component (others are left at 0).
/// Returns `(h, residual, iterations)`.
pub fn harmonic_potential(g: &FiniteGraph) -> Result<(Vec<f64>, f64, usize)> {
    check_walk_graph(g)?;
    let n = g.n_vertices();
    let root = g.root();
    let mut h = vec![0.0; n];
    for &b in g.boundary() {
        h[b] = 1.0;
    }
    // unknowns: interior vertices in the root's component
    let mut index = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        if v != root && !g.is_boundary(v) {
            index[v] = unknowns.len();
            unknowns.push(v);
        }
        for &w in g.neighbors(v) {
            let w = w as usize;
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    let m = unknowns.len();
    // Dirichlet Laplacian system A x = b, A = D - adjacency on the unknowns
    let apply = |x: &[f64], out: &mut [f64]| {
        for (i, &v) in unknowns.iter().enumerate() {
            let mut s = g.degree(v) as f64 * x[i];
            for &w in g.neighbors(v) {
                let j = index[w as usize];
                if j != usize::MAX {
                    s -= x[j];
                }
            }
            out[i] = s;
        }
    };
    let rhs: Vec<f64> = unknowns
        .iter()
        .map(|&v| g.neighbors(v).iter().filter(|&&w| g.is_boundary(w as usize)).count() as f64)
        .collect();
    let diag: Vec<f64> = unknowns.iter().map(|&v| g.degree(v) as f64).collect();
    // harmonic residual is the Laplacian residual divided by the degree
    let harmonic_residual = |r: &[f64]| r.iter().zip(&diag).map(|(a, d)| (a / d).abs()).fold(0.0, f64::max);

    let mut x = vec![0.0; m];
    let mut r = rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = 10 * m + 100;
    let mut iterations = 0;
    let mut residual = harmonic_residual(&r);
    while residual >= RESIDUAL_TOL * 0.1 && iterations < max_iter {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        if iterations % 50 == 0 {
            // refresh against drift in the recursive residual
            apply(&x, &mut ap);
            for i in 0..m {
                r[i] = rhs[i] - ap[i];
            }
        }
        residual = harmonic_residual(&r);
        for i in 0..m {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    // final residual from the true Laplacian, not the recursion
    apply(&x, &mut ap);
    let true_res: Vec<f64> = rhs.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let residual = harmonic_residual(&true_res);
    if residual >= RESIDUAL_TOL {
        return Err(Error::SolverNonConvergence { residual, iterations });
    }
    for (i, &v) in unknowns.iter().enumerate() {
        h[v] = x[i];
    }
    Ok((h, residual, iterations))
}

/// Escape probability from the harmonic potential: `(1/deg root) sum_{w~root} h(w)`.
pub fn escape_probability_exact(g: &FiniteGraph) -> Result<EscapeResult> {
    let (h, residual, iterations) = harmonic_potential(g)?;
    let root = g.root();
    let escape = g.neighbors(root).iter().map(|&w| h[w as usize]).sum::<f64>() / g.degree(root) as f64;
    Ok(EscapeResult { escape: escape.clamp(0.0, 1.0), method: EscapeMethod::Exact { residual, iterations }, n_vertices: g.n_vertices() })
}

/// Monte Carlo walks from the root; replica `r` uses stream `("walk", r)`.
pub fn escape_probability_mc(g: &FiniteGraph, replicas: usize, seed: u64) -> Result<EscapeResult> {
    check_walk_graph(g)?;
    if replicas == 0 {
        return Err(out_of_range("replicas must be >= 1"));
    }
    let root = g.root();
    let escapes: usize = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, "walk", r as u64);
            let mut v = root;
            loop {
                let nb = g.neighbors(v);
                v = nb[rng.gen_range(0..nb.len())] as usize;
                if g.is_boundary(v) {
                    return 1;
                }
                if v == root {
                    return 0;
                }
            }
        })
        .sum();
    let escape = escapes as f64 / replicas as f64;
    Ok(EscapeResult {
        escape,
        method: EscapeMethod::MonteCarlo { replicas, seed, ci: wilson(escapes as f64, replicas as f64, Z95) },
        n_vertices: g.n_vertices(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Decreasing,
    Increasing,
    Flat,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransienceVerdict {
    Vanishing,
    BoundedBelow,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransienceOptions {
    /// Escape values below this count as vanishing.
    pub floor: f64,
    /// Number of trailing sizes the trend is read from.
    pub window: usize,
    /// A log-log slope of the trailing values at or above this counts as
    /// stabilizing (`1/n` decay has slope `-1`).
    pub stable_slope: f64,
}

impl Default for TransienceOptions {
    fn default() -> Self {
        TransienceOptions { floor: 0.1, window: 3, stable_slope: -0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransienceProfile {
    pub family: FamilySpec,
    pub sizes: Vec<usize>,
    pub results: Vec<EscapeResult>,
    pub trend: Trend,
    pub final_value: f64,
    /// Slope of `ln escape` against `ln size` over the trailing window.
    pub loglog_slope: Option<f64>,
    pub verdict: TransienceVerdict,
    pub options: TransienceOptions,
    pub label: String,
}

fn trend_of(values: &[f64]) -> Trend {
    let eps = 1e-12;
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.iter().all(|d| d.abs() <= eps) {
        Trend::Flat
    } else if diffs.iter().all(|&d| d <= eps) {
        Trend::Decreasing
    } else if diffs.iter().all(|&d| d >= -eps) {
        Trend::Increasing
    } else {
        Trend::Mixed
    }
}

/// Exact escape probabilities over `family.with_size(n)` for each size, with
/// a trend read over the trailing window. Vanishing: the final value is under
/// the floor and the window is decreasing. Bounded below: the final value is
/// at or above the floor and the window is flat, increasing, or decreasing
/// with a log-log slope no steeper than `stable_slope`.
pub fn transience_profile(family: &FamilySpec, sizes: &[usize], opts: &TransienceOptions) -> Result<TransienceProfile> {
    if sizes.len() < 3 {
        return Err(out_of_range("transience_profile needs at least 3 sizes"));
    }
    if opts.window < 2 || opts.window > sizes.len() {
        return Err(out_of_range(format!("trend window {} must be in 2..={}", opts.window, sizes.len())));
    }
    if !(opts.floor > 0.0 && opts.floor < 1.0) {
        return Err(out_of_range(format!("floor {} outside (0, 1)", opts.floor)));
    }
    let results: Vec<EscapeResult> = sizes
        .par_iter()
        .map(|&n| family.with_size(n).build().and_then(|g| escape_probability_exact(&g)))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = results.iter().map(|r| r.escape).collect();
    let tail = &values[values.len() - opts.window..];
    let tail_sizes = &sizes[sizes.len() - opts.window..];
    let trend = trend_of(tail);
    let final_value = *values.last().unwrap();
    let loglog_slope = if tail.iter().all(|&v| v > 0.0) {
        let xs: Vec<f64> = tail_sizes.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = tail.iter().map(|v| v.ln()).collect();
        linear_fit(&xs, &ys).map(|f| f.slope)
    } else {
        None
    };
    let verdict = match trend {
        Trend::Decreasing | Trend::Flat if final_value < opts.floor => TransienceVerdict::Vanishing,
        _ if final_value < opts.floor => TransienceVerdict::Undetermined,
        Trend::Flat | Trend::Increasing => TransienceVerdict::BoundedBelow,
        Trend::Decreasing if loglog_slope.is_some_and(|s| s >= opts.stable_slope) => TransienceVerdict::BoundedBelow,
        _ => TransienceVerdict::Undetermined,
    };
    Ok(TransienceProfile {
        family: family.clone(),
        sizes: sizes.to_vec(),
        results,
        trend,
        final_value,
        loglog_slope,
        verdict,
        options: *opts,
        label: TRANSIENCE_LABEL.to_string(),
    })
}
