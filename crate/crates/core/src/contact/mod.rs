//! Contact process (recovery rate 1, infection rate `lambda` per directed
//! edge) by the graphical representation, with survival curves and the
//! weak/strong survival threshold estimators.

mod graphical;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::graph::{FamilySpec, FiniteGraph};
use crate::rng;
use crate::stats::{fit_extrapolation_within, last_downcrossing, percentile_interval, wilson, DecayModel, ExtrapolationFit, Z95};
use graphical::{Engine, PassOutcome, Scratch, StopOn};

/// Arrow rate used by [`graphical_sim`]; runs with the same seed are
/// coupled for every `lambda` up to this value.
pub const DEFAULT_LAMBDA_MAX: f64 = 4.0;

pub const LAMBDA_LABEL: &str = "heuristic: finite-horizon survival crossing";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactStats {
    pub lambda: f64,
    pub horizon: f64,
    /// `None` when the run is censored at the horizon.
    pub extinction_time: Option<f64>,
    pub censored: bool,
    /// Healthy-to-infected transitions of the root after `T / 2`.
    pub root_reinfections: u32,
    /// The root is infected at some time in `[T / 2, T]`.
    pub root_late: bool,
    /// Largest graph distance from the initial set reached by the infection.
    pub max_distance: u32,
    pub touched_boundary: bool,
    pub alive_at_horizon: bool,
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(())
    } else {
        Err(out_of_range(format!("horizon {horizon} must be positive")))
    }
}

fn stats_from(pass: &PassOutcome, lambdas: &[f64], horizon: f64) -> Vec<ContactStats> {
    pass.rates
        .iter()
        .zip(lambdas)
        .enumerate()
        .map(|(i, (o, &lambda))| ContactStats {
            lambda,
            horizon,
            extinction_time: o.extinction_time,
            censored: o.extinction_time.is_none(),
            root_reinfections: o.root_reinfections,
            root_late: i >= pass.root_windows[0],
            max_distance: o.max_distance,
            touched_boundary: o.touched_boundary,
            alive_at_horizon: o.extinction_time.is_none(),
        })
        .collect()
}

/// One run at rate `lambda`, thinned from arrows of rate
/// `max(lambda, DEFAULT_LAMBDA_MAX)`.
pub fn graphical_sim(g: &FiniteGraph, lambda: f64, init: &[usize], horizon: f64, seed: u64) -> Result<ContactStats> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(out_of_range(format!("lambda {lambda} must be >= 0")));
    }
    Ok(coupled_sim(g, &[lambda], DEFAULT_LAMBDA_MAX.max(lambda), init, horizon, seed)?.remove(0))
}

/// Runs at several rates on one realization of the graphical representation
/// (shared seed and `lambda_max`); results follow the order of `lambdas`.
pub fn coupled_sim(g: &FiniteGraph, lambdas: &[f64], lambda_max: f64, init: &[usize], horizon: f64, seed: u64) -> Result<Vec<ContactStats>> {
    check_horizon(horizon)?;
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| lambdas[i]).collect();
    let engine = Engine::new(g, &sorted, lambda_max, init)?;
    let mut scratch = Scratch::new(g.n_vertices());
    let pass = engine.run(&mut scratch, init, horizon, &[(horizon / 2.0, horizon)], StopOn::Horizon, seed, &mut |_, _| {});
    let mut out: Vec<Option<ContactStats>> = vec![None; lambdas.len()];
    for (j, st) in stats_from(&pass, &sorted, horizon).into_iter().enumerate() {
        out[order[j]] = Some(st);
    }
    Ok(out.into_iter().map(|s| s.expect("every rate simulated")).collect())
}

/// Infected set after every event of one run, for inspecting the coupling.
pub fn infected_trajectory(
    g: &FiniteGraph,
    lambda: f64,
    lambda_max: f64,
    init: &[usize],
    horizon: f64,
    seed: u64,
) -> Result<Vec<(f64, Vec<usize>)>> {
    check_horizon(horizon)?;
    let engine = Engine::new(g, &[lambda], lambda_max, init)?;
    let mut scratch = Scratch::new(g.n_vertices());
    let mut traj = vec![(0.0, { let mut v = init.to_vec(); v.sort_unstable(); v.dedup(); v })];
    engine.run(&mut scratch, init, horizon, &[], StopOn::Horizon, seed, &mut |t, level| {
        traj.push((t, (0..level.len()).filter(|&v| level[v] == 0).collect()));
    });
    Ok(traj)
}

/// Per-replica indicators. Each holds on an upper range of the rate grid;
/// the fields are the lowest rate index where it holds (`k` when nowhere).
#[derive(Debug, Clone, Copy, Default)]
struct ReplicaMarks {
    alive_end: usize,
    /// Root infected at some time in `[T/2, T]`.
    late_end: usize,
    touched: usize,
}

/// `grid` ascending; replica `r` uses stream `("contact", r)` and arrows of
/// rate `max(grid)`. Only the indicator named by `stop` is exact when `stop`
/// is not `Horizon`.
fn run_replicas(g: &FiniteGraph, grid: &[f64], horizon: f64, replicas: usize, seed: u64, stop: StopOn) -> Result<Vec<ReplicaMarks>> {
    check_horizon(horizon)?;
    if replicas == 0 {
        return Err(out_of_range("replicas must be >= 1"));
    }
    let lambda_max = grid.last().copied().unwrap_or(0.0);
    let init = [g.root()];
    let engine = Engine::new(g, grid, lambda_max, &init)?;
    let k = engine.n_rates();
    let windows = [(horizon / 2.0, horizon)];
    let n = g.n_vertices();
    Ok((0..replicas)
        .into_par_iter()
        .map_init(
            || Scratch::new(n),
            |s, r| {
                let rs = rng::derive_seed(seed, "contact", r as u64);
                let pass = engine.run(s, &init, horizon, &windows, stop, rs, &mut |_, _| {});
                ReplicaMarks {
                    alive_end: pass.rates.iter().position(|o| o.extinction_time.is_none()).unwrap_or(k),
                    late_end: pass.root_windows[0],
                    touched: pass.rates.iter().position(|o| o.touched_boundary).unwrap_or(k),
                }
            },
        )
        .collect())
}

/// Weighted fraction of replicas whose indicator holds at each grid rate.
fn fractions(runs: &[ReplicaMarks], pick: fn(&ReplicaMarks) -> usize, k: usize, mult: Option<&[u32]>) -> Vec<f64> {
    let mut hist = vec![0u64; k + 1];
    let mut total = 0u64;
    for (r, m) in runs.iter().enumerate() {
        let w = mult.map_or(1, |m| m[r]) as u64;
        total += w;
        hist[pick(m).min(k)] += w;
    }
    let mut acc = 0u64;
    hist[..k]
        .iter()
        .map(|&h| {
            acc += h;
            acc as f64 / total.max(1) as f64
        })
        .collect()
}

fn sorted_grid(lambda_grid: &[f64]) -> Result<Vec<f64>> {
    if lambda_grid.is_empty() {
        return Err(out_of_range("lambda grid is empty"));
    }
    if let Some(l) = lambda_grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(out_of_range(format!("lambda {l} must be >= 0")));
    }
    let mut grid = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub lambda: Vec<f64>,
    /// Fraction of runs alive at the horizon.
    pub survival: Vec<f64>,
    pub survival_ci: Vec<(f64, f64)>,
    /// Fraction of runs whose root is infected at some time in `[T/2, T]`.
    pub reinfection: Vec<f64>,
    pub reinfection_ci: Vec<(f64, f64)>,
    pub boundary_touch: Vec<f64>,
    pub horizon: f64,
    pub replicas: usize,
    pub seed: u64,
}

/// Survival and late-root-infection fractions from the root, all grid rates
/// on shared realizations (so both are nondecreasing in `lambda` exactly).
pub fn survival_curve(g: &FiniteGraph, lambda_grid: &[f64], horizon: f64, replicas: usize, seed: u64) -> Result<SurvivalCurve> {
    let grid = sorted_grid(lambda_grid)?;
    let runs = run_replicas(g, &grid, horizon, replicas, seed, StopOn::Horizon)?;
    let k = grid.len();
    let survival = fractions(&runs, |b| b.alive_end, k, None);
    let reinfection = fractions(&runs, |b| b.late_end, k, None);
    let ci = |xs: &[f64]| xs.iter().map(|&x| wilson(x * replicas as f64, replicas as f64, Z95)).collect();
    Ok(SurvivalCurve {
        survival_ci: ci(&survival),
        reinfection_ci: ci(&reinfection),
        boundary_touch: fractions(&runs, |b| b.touched, k, None),
        lambda: grid,
        survival,
        reinfection,
        horizon,
        replicas,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalKind {
    /// Alive at the horizon or reached the truncation boundary before it.
    Weak,
    /// Root infected late in the run.
    Strong,
}

/// How a size's threshold is read off its survival curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalRule {
    /// The indicator's probability equals `level`.
    Level { level: f64 },
    /// The indicator's probability on size `n` (horizon `T_n`) is half its
    /// value on size `n / 2` (horizon `T_n / 2`). At criticality on trees
    /// survival decays like `1 / t`, so the ratio sits at one half; it tends
    /// to zero below and to one above.
    ScaleRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaOptions {
    pub replicas: usize,
    pub seed: u64,
    /// Horizon `T = horizon_per_size * n` for size `n`.
    pub horizon_per_size: f64,
    pub rule: SurvivalRule,
    pub model: DecayModel,
    pub bootstrap: usize,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            replicas: 1000,
            seed: 0,
            horizon_per_size: 4.0,
            rule: SurvivalRule::ScaleRatio,
            model: DecayModel::Power,
            bootstrap: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSize {
    pub n: usize,
    pub n_vertices: usize,
    pub horizon: f64,
    pub lambda_hat: f64,
    pub ci: (f64, f64),
    /// False when the curve does not cross inside the grid; `lambda_hat` is then the nearer grid end.
    pub crossed: bool,
    /// Fraction of runs reaching the boundary at the grid rate nearest `lambda_hat`.
    pub boundary_touch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub family: FamilySpec,
    pub kind: SurvivalKind,
    pub rule: SurvivalRule,
    pub per_size: Vec<LambdaSize>,
    pub fit: Option<ExtrapolationFit>,
    pub used_fallback: bool,
    pub lambda_inf: f64,
    pub ci: (f64, f64),
    pub horizon_per_size: f64,
    pub replicas: usize,
    pub seed: u64,
    pub label: String,
}

fn interpolate(grid: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = grid.partition_point(|&g| g <= x);
    if i == 0 {
        return ys[0];
    }
    if i == grid.len() {
        return ys[grid.len() - 1];
    }
    let (x0, x1) = (grid[i - 1], grid[i]);
    ys[i - 1] + (ys[i] - ys[i - 1]) * (x - x0) / (x1 - x0)
}

/// Threshold on the grid and whether the curve crossed inside it. `half`
/// holds the half-size curve(s), log-averaged when `n` is odd.
fn lambda_crossing(rule: SurvivalRule, grid: &[f64], full: &[f64], half: &[&[f64]]) -> (f64, bool) {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let f = |x: f64| -> f64 {
        let v = match rule {
            SurvivalRule::Level { level } => interpolate(grid, full, x).ln() - level.ln(),
            SurvivalRule::ScaleRatio => {
                let h = half.iter().map(|c| interpolate(grid, c, x).ln()).sum::<f64>() / half.len() as f64;
                interpolate(grid, full, x).ln() - h + std::f64::consts::LN_2
            }
        };
        if v.is_nan() { -1.0 } else { v }
    };
    if grid.len() < 2 || f(hi) < 0.0 {
        return (hi, false);
    }
    match last_downcrossing(f, lo, hi, 8 * grid.len(), 1e-7) {
        Some(x) => (x, true),
        None => (lo, false),
    }
}

fn half_sizes(n: usize) -> Vec<usize> {
    if n.is_multiple_of(2) {
        vec![n / 2]
    } else {
        vec![n / 2, n / 2 + 1]
    }
}

pub fn estimate_lambda_c(family: &FamilySpec, sizes: &[usize], lambda_grid: &[f64], opts: &LambdaOptions) -> Result<LambdaEstimate> {
    estimate_lambda(SurvivalKind::Weak, family, sizes, lambda_grid, opts)
}

pub fn estimate_lambda_s(family: &FamilySpec, sizes: &[usize], lambda_grid: &[f64], opts: &LambdaOptions) -> Result<LambdaEstimate> {
    estimate_lambda(SurvivalKind::Strong, family, sizes, lambda_grid, opts)
}

/// Per-size crossings of the escape-or-survival (weak) or late-root-infection (strong)
/// curve from the root at horizon `horizon_per_size * n`, extrapolated in `n`
/// with replica-bootstrap intervals.
pub fn estimate_lambda(
    kind: SurvivalKind,
    family: &FamilySpec,
    sizes: &[usize],
    lambda_grid: &[f64],
    opts: &LambdaOptions,
) -> Result<LambdaEstimate> {
    if sizes.len() < 2 {
        return Err(out_of_range("threshold estimates need at least 2 sizes"));
    }
    if let SurvivalRule::Level { level } = opts.rule {
        if !(level > 0.0 && level < 1.0) {
            return Err(out_of_range(format!("crossing level {level} outside (0, 1)")));
        }
    }
    if !(opts.horizon_per_size.is_finite() && opts.horizon_per_size > 0.0) {
        return Err(out_of_range("horizon_per_size must be positive"));
    }
    let grid = sorted_grid(lambda_grid)?;
    let k = grid.len();
    let ratio = matches!(opts.rule, SurvivalRule::ScaleRatio);
    if ratio && sizes.iter().any(|&n| n < 2) {
        return Err(out_of_range("the scale-ratio rule needs sizes >= 2"));
    }
    let (pick, stop): (fn(&ReplicaMarks) -> usize, StopOn) = match kind {
        SurvivalKind::Weak => (|b| b.alive_end.min(b.touched), StopOn::Touched),
        SurvivalKind::Strong => (|b| b.late_end, StopOn::Window(0)),
    };
    let mut needed: Vec<usize> = sizes.to_vec();
    if ratio {
        needed.extend(sizes.iter().flat_map(|&n| half_sizes(n)));
    }
    needed.sort_unstable();
    needed.dedup();

    let mut runs = BTreeMap::new();
    let mut info = BTreeMap::new();
    for &n in &needed {
        let g = family.with_size(n).build()?;
        let horizon = opts.horizon_per_size * n as f64;
        let seed = rng::derive_seed(opts.seed, "contact-size", n as u64);
        runs.insert(n, run_replicas(&g, &grid, horizon, opts.replicas, seed, stop)?);
        info.insert(n, (g.n_vertices(), horizon));
    }
    let crossings = |mults: Option<&BTreeMap<usize, Vec<u32>>>| -> Vec<(f64, bool)> {
        let curve = |m: usize| fractions(&runs[&m], pick, k, mults.map(|x| x[&m].as_slice()));
        sizes
            .iter()
            .map(|&n| {
                let full = curve(n);
                let halves: Vec<Vec<f64>> = if ratio { half_sizes(n).into_iter().map(curve).collect() } else { Vec::new() };
                let refs: Vec<&[f64]> = halves.iter().map(|h| h.as_slice()).collect();
                lambda_crossing(opts.rule, &grid, &full, &refs)
            })
            .collect()
    };
    let point = crossings(None);
    let ns: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let range = (grid[0], grid[k - 1]);
    let extrapolate = |ys: &[f64]| -> (Option<ExtrapolationFit>, bool, f64) {
        let last = *ys.last().unwrap();
        match fit_extrapolation_within(&ns, ys, opts.model, range) {
            Some(f) if f.well_conditioned => (Some(f), false, f.p_inf),
            other => (other, true, last),
        }
    };

    let mut boot_rng = rng::stream(opts.seed, "contact-boot", 0);
    let r = opts.replicas;
    let mut boot_sizes: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.bootstrap); sizes.len()];
    let mut boot_inf = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let mults: BTreeMap<usize, Vec<u32>> = needed
            .iter()
            .map(|&n| {
                let mut m = vec![0u32; r];
                for _ in 0..r {
                    m[boot_rng.gen_range(0..r)] += 1;
                }
                (n, m)
            })
            .collect();
        let ys: Vec<f64> = crossings(Some(&mults)).into_iter().map(|c| c.0).collect();
        for (acc, &y) in boot_sizes.iter_mut().zip(&ys) {
            acc.push(y);
        }
        boot_inf.push(extrapolate(&ys).2);
    }

    let per_size: Vec<LambdaSize> = sizes
        .iter()
        .enumerate()
        .map(|(s, &n)| {
            let (lambda_hat, crossed) = point[s];
            let touch = fractions(&runs[&n], |b| b.touched, k, None);
            let nearest = grid.partition_point(|&g| g < lambda_hat).min(k - 1);
            LambdaSize {
                n,
                n_vertices: info[&n].0,
                horizon: info[&n].1,
                lambda_hat,
                ci: if boot_sizes[s].is_empty() { (f64::NAN, f64::NAN) } else { percentile_interval(&boot_sizes[s]) },
                crossed,
                boundary_touch: touch[nearest],
            }
        })
        .collect();
    let ys: Vec<f64> = per_size.iter().map(|s| s.lambda_hat).collect();
    let (fit, used_fallback, lambda_inf) = extrapolate(&ys);
    Ok(LambdaEstimate {
        family: family.clone(),
        kind,
        rule: opts.rule,
        per_size,
        fit,
        used_fallback,
        lambda_inf,
        ci: if boot_inf.is_empty() { (f64::NAN, f64::NAN) } else { percentile_interval(&boot_inf) },
        horizon_per_size: opts.horizon_per_size,
        replicas: opts.replicas,
        seed: opts.seed,
        label: LAMBDA_LABEL.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{half_line, tree_ball};
    use crate::graph::EdgeTag;

    fn single_vertex() -> FiniteGraph {
        FiniteGraph::from_edges(1, &[], 0, &[], None, FamilySpec::Custom { name: "point".into() }).unwrap()
    }

    fn k2() -> FiniteGraph {
        FiniteGraph::from_edges(2, &[(0, 1, EdgeTag::Plain)], 0, &[1], None, FamilySpec::Custom { name: "k2".into() }).unwrap()
    }

    #[test]
    fn lone_vertex_dies_at_unit_rate() {
        let g = single_vertex();
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|r| graphical_sim(&g, 1.3, &[0], 50.0, r).unwrap().extinction_time.unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn zero_rate_is_pure_recovery() {
        let g = tree_ball(3, 3).unwrap();
        let n = 10_000;
        let times: Vec<f64> = (0..n).map(|r| graphical_sim(&g, 0.0, &[0], 50.0, r).unwrap().extinction_time.unwrap()).collect();
        let mean = times.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
        // P(T > 1) = e^-1 for an exponential clock
        let tail = times.iter().filter(|&&t| t > 1.0).count() as f64 / n as f64;
        assert!((tail - (-1.0f64).exp()).abs() < 0.015, "{tail}");
    }

    /// Infected set at time `t` from a trajectory (the state after the last event at or before `t`).
    fn state_at(traj: &[(f64, Vec<usize>)], t: f64) -> &[usize] {
        let i = traj.partition_point(|(s, _)| *s <= t);
        &traj[i.max(1) - 1].1
    }

    #[test]
    fn rates_are_coupled_by_set_containment() {
        let g = tree_ball(3, 4).unwrap();
        for seed in 0..20 {
            let lo = infected_trajectory(&g, 0.6, 2.0, &[0], 30.0, seed).unwrap();
            let hi = infected_trajectory(&g, 1.1, 2.0, &[0], 30.0, seed).unwrap();
            for t in lo.iter().chain(&hi).map(|(t, _)| *t) {
                let (a, b) = (state_at(&lo, t), state_at(&hi, t));
                assert!(a.iter().all(|v| b.binary_search(v).is_ok()), "seed {seed} t {t}");
            }
        }
    }

    #[test]
    fn extinction_is_absorbing() {
        let g = half_line(6).unwrap();
        let traj = infected_trajectory(&g, 0.8, 0.8, &[0, 3], 40.0, 9).unwrap();
        if let Some(i) = traj.iter().position(|(_, s)| s.is_empty()) {
            assert_eq!(i, traj.len() - 1);
        }
        assert!(traj.windows(2).all(|w| w[0].0 <= w[1].0));
    }

    /// `exp(Q t)` row for a small generator by scaling and squaring a Taylor series.
    fn expm_row(q: &[[f64; 4]; 4], t: f64, start: usize) -> [f64; 4] {
        let s = 20;
        let h = t / (1u64 << s) as f64;
        let mut m = [[0.0; 4]; 4];
        let mut term = [[0.0; 4]; 4];
        for i in 0..4 {
            m[i][i] = 1.0;
            term[i][i] = 1.0;
        }
        for k in 1..20 {
            let mut next = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    next[i][j] = (0..4).map(|l| term[i][l] * q[l][j] * h).sum::<f64>() / k as f64;
                }
            }
            term = next;
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..s {
            let mut sq = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    sq[i][j] = (0..4).map(|l| m[i][l] * m[l][j]).sum();
                }
            }
            m = sq;
        }
        m[start]
    }

    #[test]
    fn k2_survival_matches_markov_chain() {
        // states: 0 = none, 1 = only root, 2 = only other, 3 = both
        let lambda = 1.5;
        let mut q = [[0.0; 4]; 4];
        q[1][0] = 1.0;
        q[1][3] = lambda;
        q[2][0] = 1.0;
        q[2][3] = lambda;
        q[3][1] = 1.0;
        q[3][2] = 1.0;
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = -(0..4).filter(|&j| j != i).map(|j| row[j]).sum::<f64>();
        }
        let t = 2.0;
        let exact = 1.0 - expm_row(&q, t, 1)[0];
        let reps = 20_000;
        let c = survival_curve(&k2(), &[0.5, lambda, 2.5], t, reps, 4).unwrap();
        let sigma = (exact * (1.0 - exact) / reps as f64).sqrt();
        assert!((c.survival[1] - exact).abs() < 3.0 * sigma, "{} vs {exact}", c.survival[1]);
    }

    #[test]
    fn curves_are_monotone_and_vanish_at_zero_rate() {
        let g = tree_ball(3, 5).unwrap();
        let grid: Vec<f64> = (0..=12).map(|i| i as f64 * 0.1).collect();
        let c = survival_curve(&g, &grid, 20.0, 500, 2).unwrap();
        assert_eq!(c.survival[0], 0.0);
        assert!(c.survival.windows(2).all(|w| w[0] <= w[1]));
        assert!(c.reinfection.windows(2).all(|w| w[0] <= w[1]));
        assert!(c.survival.iter().zip(&c.reinfection).all(|(s, r)| (0.0..=1.0).contains(s) && (0.0..=1.0).contains(r)));
    }

    #[test]
    fn large_grids_span_several_passes_coherently() {
        let g = tree_ball(3, 4).unwrap();
        let grid: Vec<f64> = (0..150).map(|i| i as f64 * 0.01).collect();
        let c = survival_curve(&g, &grid, 10.0, 200, 8).unwrap();
        assert!(c.survival.windows(2).all(|w| w[0] <= w[1]));
        let single = coupled_sim(&g, &[1.49, 0.3], 1.49, &[0], 10.0, 5).unwrap();
        assert_eq!(single[0].lambda, 1.49);
        assert!(single[1].max_distance <= single[0].max_distance);
    }

    #[test]
    fn parameter_checks() {
        let g = k2();
        assert!(graphical_sim(&g, -1.0, &[0], 1.0, 0).is_err());
        assert!(graphical_sim(&g, 1.0, &[], 1.0, 0).is_err());
        assert!(graphical_sim(&g, 1.0, &[0], 0.0, 0).is_err());
        assert!(survival_curve(&g, &[], 1.0, 10, 0).is_err());
        assert!(estimate_lambda_c(&FamilySpec::line(0), &[4], &[1.0, 2.0], &LambdaOptions::default()).is_err());
    }
}
