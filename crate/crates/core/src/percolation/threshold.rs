//! Finite-size crossing estimates of the percolation threshold.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bottleneck::{root_boundary_thresholds, shell_thresholds, NO_SHELL};
use crate::error::{out_of_range, Result};
use crate::graph::{FamilySpec, FiniteGraph};
use crate::rng;
use crate::stats::{fit_extrapolation, last_downcrossing, percentile_interval, DecayModel, ExtrapolationFit};

/// How a single size's crossing point is read off the root-boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingRule {
    /// `theta_n(p) = level`.
    Level { level: f64 },
    /// `theta_n(p) / theta_{n/2}(p) = 1/2`. At criticality on trees the
    /// connection probability decays like `1/n`, so the ratio sits at one
    /// half; below criticality it tends to zero and above it to one.
    ScaleRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcOptions {
    pub replicas: usize,
    pub seed: u64,
    pub rule: CrossingRule,
    pub model: DecayModel,
    pub bootstrap: usize,
    /// Measure all sizes inside the largest truncation when the family allows it.
    pub nested: bool,
}

impl Default for PcOptions {
    fn default() -> Self {
        PcOptions { replicas: 2000, seed: 0, rule: CrossingRule::ScaleRatio, model: DecayModel::Power, bootstrap: 200, nested: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCrossing {
    pub n: usize,
    pub n_vertices: usize,
    pub p_hat: f64,
    pub ci: (f64, f64),
    /// False when the curve never reaches the target; `p_hat` is then 1.
    pub crossed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub family: FamilySpec,
    pub rule: CrossingRule,
    pub per_size: Vec<SizeCrossing>,
    pub fit: Option<ExtrapolationFit>,
    /// Set when the extrapolation was unusable and `p_inf` is the largest-size crossing.
    pub used_fallback: bool,
    pub p_inf: f64,
    pub ci: (f64, f64),
    pub replicas: usize,
    pub seed: u64,
    pub nested: bool,
}

/// Sorted root-boundary thresholds of one size; `theta(p)` is the fraction at or below `p`.
struct SizeCurve {
    sorted: Vec<f64>,
}

impl SizeCurve {
    /// Prefix counts over the sorted thresholds, optionally reweighted by a resample.
    fn cumulative(&self, multiplicity: Option<&[u32]>) -> Vec<u32> {
        let mut acc = 0u32;
        let mut cum = Vec::with_capacity(self.sorted.len() + 1);
        cum.push(0);
        for i in 0..self.sorted.len() {
            acc += multiplicity.map_or(1, |m| m[i]);
            cum.push(acc);
        }
        cum
    }

    fn ln_theta(&self, cum: &[u32], p: f64) -> f64 {
        let i = self.sorted.partition_point(|&t| t <= p);
        (cum[i] as f64 / self.sorted.len() as f64).ln()
    }
}

/// The curve for a size, given as one or two (log-averaged) measured sizes.
struct Evaluator<'a> {
    parts: Vec<(&'a SizeCurve, Vec<u32>)>,
}

impl Evaluator<'_> {
    fn ln_theta(&self, p: f64) -> f64 {
        let k = self.parts.len() as f64;
        self.parts.iter().map(|(c, cum)| c.ln_theta(cum, p)).sum::<f64>() / k
    }
}

/// Largest `p` at which the rule's statistic is still below its target,
/// i.e. the crossing approached from the well-sampled side `p = 1`.
fn crossing(rule: CrossingRule, full: &Evaluator, half: Option<&Evaluator>, scan: usize) -> Option<f64> {
    let f = |p: f64| -> f64 {
        let v = match rule {
            CrossingRule::Level { level } => full.ln_theta(p) - level.ln(),
            CrossingRule::ScaleRatio => {
                let half = half.expect("ratio rule needs the half-size curve");
                full.ln_theta(p) - half.ln_theta(p) + std::f64::consts::LN_2
            }
        };
        if v.is_nan() { -1.0 } else { v }
    };
    last_downcrossing(f, 0.0, 1.0, scan, 1e-7)
}

/// Sizes whose curves a rule needs for size `n`.
fn half_sizes(n: usize) -> Vec<usize> {
    if n.is_multiple_of(2) {
        vec![n / 2]
    } else {
        vec![n / 2, n / 2 + 1]
    }
}

/// For families whose size-`m` truncation sits inside the size-`n` one with
/// its boundary as a separating shell, the largest graph and the shell index
/// of every vertex (`sizes` ascending). Reaching a separating shell inside the
/// big graph is the same event as reaching the boundary of the small one.
fn nested_shells(family: &FamilySpec, sizes: &[usize]) -> Result<Option<(FiniteGraph, Vec<u32>)>> {
    let n_max = *sizes.last().unwrap();
    let index_of = |m: u32| sizes.binary_search(&(m as usize)).map_or(NO_SHELL, |i| i as u32);
    let g = match family {
        FamilySpec::TreeBall { .. } | FamilySpec::HalfLine { .. } | FamilySpec::Canopy { .. } => family.with_size(n_max).build()?,
        FamilySpec::GridBox { periodic: false, .. } => family.with_size(n_max).build()?,
        _ => return Ok(None),
    };
    let dist = g.distances_from(g.root());
    let shell_of: Vec<u32> = match family {
        FamilySpec::TreeBall { .. } | FamilySpec::HalfLine { .. } => dist.iter().map(|&d| index_of(d)).collect(),
        FamilySpec::Canopy { .. } => {
            // the size-m canopy around the root leaf ends at the root's level-m ancestor
            let labels = g.labels().expect("canopy carries levels");
            let col = labels.field("level").expect("canopy carries levels");
            (0..g.n_vertices())
                .map(|v| {
                    let level = labels.values[v][col] as u32;
                    if level == dist[v] { index_of(level) } else { NO_SHELL }
                })
                .collect()
        }
        _ => {
            let labels = g.labels().expect("grid carries coordinates");
            let center = n_max as i64;
            (0..g.n_vertices())
                .map(|v| {
                    let linf = labels.values[v].iter().map(|&x| (x - center).unsigned_abs()).max().unwrap_or(0);
                    index_of(linf as u32)
                })
                .collect()
        }
    };
    Ok(Some((g, shell_of)))
}

fn extrapolate(ns: &[f64], ys: &[f64], model: DecayModel) -> (Option<ExtrapolationFit>, bool, f64) {
    let last = *ys.last().unwrap();
    match fit_extrapolation(ns, ys, model) {
        Some(f) if f.well_conditioned => (Some(f), false, f.p_inf),
        other => (other, true, last),
    }
}

/// Per-size crossings of the root-boundary curve of `family.with_size(n)`,
/// extrapolated in `n` with bootstrap intervals over replicas.
pub fn estimate_pc(family: &FamilySpec, sizes: &[usize], opts: &PcOptions) -> Result<PcEstimate> {
    if sizes.len() < 3 {
        return Err(out_of_range("estimate_pc needs at least 3 sizes"));
    }
    if let CrossingRule::Level { level } = opts.rule {
        if !(level > 0.0 && level < 1.0) {
            return Err(out_of_range(format!("crossing level {level} outside (0, 1)")));
        }
    }
    let ratio = matches!(opts.rule, CrossingRule::ScaleRatio);
    if opts.replicas == 0 {
        return Err(out_of_range("replicas must be >= 1"));
    }
    if ratio && sizes.iter().any(|&n| n < 2) {
        return Err(out_of_range("the scale-ratio rule needs sizes >= 2"));
    }
    let mut needed: Vec<usize> = sizes.to_vec();
    if ratio {
        needed.extend(sizes.iter().flat_map(|&n| half_sizes(n)));
    }
    needed.sort_unstable();
    needed.dedup();

    let mut curves: BTreeMap<usize, SizeCurve> = BTreeMap::new();
    let mut n_vertices: BTreeMap<usize, usize> = BTreeMap::new();
    for &n in &needed {
        n_vertices.insert(n, family.with_size(n).build()?.n_vertices());
    }
    let nested = if opts.nested { nested_shells(family, &needed)? } else { None };
    let used_nested = nested.is_some();
    match nested {
        Some((g, shell_of)) => {
            let seed = rng::derive_seed(opts.seed, "pc-nested", 0);
            let all = shell_thresholds(&g, &shell_of, needed.len(), opts.replicas, seed)?;
            for (&n, mut sorted) in needed.iter().zip(all) {
                sorted.sort_by(f64::total_cmp);
                curves.insert(n, SizeCurve { sorted });
            }
        }
        None => {
            for &n in &needed {
                let g = family.with_size(n).build()?;
                let seed = rng::derive_seed(opts.seed, "pc-size", n as u64);
                let mut sorted = root_boundary_thresholds(&g, opts.replicas, seed)?;
                sorted.sort_by(f64::total_cmp);
                curves.insert(n, SizeCurve { sorted });
            }
        }
    }

    let evaluate = |picks: &BTreeMap<usize, Option<Vec<u32>>>, scan: usize| -> Vec<Option<f64>> {
        let eval_of = |ns: &[usize]| Evaluator {
            parts: ns
                .iter()
                .map(|m| {
                    let c = &curves[m];
                    (c, c.cumulative(picks[m].as_deref()))
                })
                .collect(),
        };
        sizes
            .iter()
            .map(|&n| {
                let full = eval_of(&[n]);
                let half = ratio.then(|| eval_of(&half_sizes(n)));
                crossing(opts.rule, &full, half.as_ref(), scan)
            })
            .collect()
    };

    let no_pick: BTreeMap<usize, Option<Vec<u32>>> = needed.iter().map(|&n| (n, None)).collect();
    let point: Vec<Option<f64>> = evaluate(&no_pick, 400);

    let mut boot_rng = rng::stream(opts.seed, "pc-boot", 0);
    let r = opts.replicas;
    let mut boot_sizes: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.bootstrap); sizes.len()];
    let mut boot_inf = Vec::with_capacity(opts.bootstrap);
    let ns: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    for _ in 0..opts.bootstrap {
        let picks: BTreeMap<usize, Option<Vec<u32>>> = needed
            .iter()
            .map(|&n| {
                let mut mult = vec![0u32; r];
                for _ in 0..r {
                    mult[boot_rng.gen_range(0..r)] += 1;
                }
                (n, Some(mult))
            })
            .collect();
        let ys: Vec<f64> = evaluate(&picks, 100).into_iter().map(|c| c.unwrap_or(1.0)).collect();
        for (acc, &y) in boot_sizes.iter_mut().zip(&ys) {
            acc.push(y);
        }
        boot_inf.push(extrapolate(&ns, &ys, opts.model).2);
    }

    let per_size: Vec<SizeCrossing> = sizes
        .iter()
        .zip(&point)
        .zip(&boot_sizes)
        .map(|((&n, c), boots)| SizeCrossing {
            n,
            n_vertices: n_vertices[&n],
            p_hat: c.unwrap_or(1.0),
            ci: if boots.is_empty() { (f64::NAN, f64::NAN) } else { percentile_interval(boots) },
            crossed: c.is_some(),
        })
        .collect();
    let ys: Vec<f64> = per_size.iter().map(|s| s.p_hat).collect();
    let (fit, used_fallback, p_inf) = extrapolate(&ns, &ys, opts.model);
    let ci = if boot_inf.is_empty() { (f64::NAN, f64::NAN) } else { percentile_interval(&boot_inf) };
    Ok(PcEstimate {
        family: family.clone(),
        rule: opts.rule,
        per_size,
        fit,
        used_fallback,
        p_inf,
        ci,
        replicas: opts.replicas,
        seed: opts.seed,
        nested: used_nested,
    })
}
