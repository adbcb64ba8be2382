//! Small statistics toolkit: score intervals, bootstrap percentiles, least
//! squares, and the finite-size extrapolation fits.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n` Bernoulli trials.
pub fn wilson(successes: f64, n: f64, z: f64) -> (f64, f64) {
    if n <= 0.0 {
        return (0.0, 1.0);
    }
    let phat = (successes / n).clamp(0.0, 1.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Linear interpolation percentile of an already sorted slice, `q` in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// 2.5% / 97.5% percentile interval of a sample (NaNs dropped).
pub fn percentile_interval(samples: &[f64]) -> (f64, f64) {
    let mut s: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
    if s.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (percentile_sorted(&s, 0.025), percentile_sorted(&s, 0.975))
}

/// Bootstrap resample of `0..n` indices.
pub fn resample_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` when the response has zero variance.
    pub r2: Option<f64>,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = y.iter().map(|&b| (b - my) * (b - my)).sum();
    let sse: f64 = x.iter().zip(y).map(|(&a, &b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 1e-300 { Some(1.0 - sse / syy) } else { None };
    Some(LineFit { slope, intercept, r2 })
}

/// Correction shape for the size extrapolation `p(n) = p_inf + a * shape_b(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `n^{-b}`
    Power,
    /// `e^{-b n}`
    Exponential,
}

impl DecayModel {
    fn shape(self, n: f64, b: f64) -> f64 {
        match self {
            DecayModel::Power => n.powf(-b),
            DecayModel::Exponential => (-b * n).exp(),
        }
    }

    fn b_range(self) -> (f64, f64) {
        match self {
            DecayModel::Power => (0.05, 6.0),
            DecayModel::Exponential => (0.005, 3.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationFit {
    pub model: DecayModel,
    pub p_inf: f64,
    pub amplitude: f64,
    pub rate: f64,
    pub sse: f64,
    /// False when the optimum sits on the edge of the rate range or the
    /// asymptote leaves `[0, 1]`.
    pub well_conditioned: bool,
}

/// Least-squares fit of `y = p_inf + a * shape_b(n)`: for fixed `b` the problem
/// is linear in `(p_inf, a)`, so `b` is profiled over a log grid and refined by
/// golden-section search.
pub fn fit_extrapolation(ns: &[f64], ys: &[f64], model: DecayModel) -> Option<ExtrapolationFit> {
    fit_extrapolation_within(ns, ys, model, (0.0, 1.0))
}

/// As [`fit_extrapolation`], with the asymptote required to lie in `range`
/// for the fit to count as well conditioned.
pub fn fit_extrapolation_within(ns: &[f64], ys: &[f64], model: DecayModel, range: (f64, f64)) -> Option<ExtrapolationFit> {
    if ns.len() < 3 || ns.len() != ys.len() {
        return None;
    }
    let solve = |b: f64| -> (f64, f64, f64) {
        let xs: Vec<f64> = ns.iter().map(|&n| model.shape(n, b)).collect();
        match linear_fit(&xs, ys) {
            Some(f) => {
                let sse: f64 =
                    xs.iter().zip(ys).map(|(&x, &y)| (y - f.intercept - f.slope * x).powi(2)).sum();
                (f.intercept, f.slope, sse)
            }
            None => (f64::NAN, f64::NAN, f64::INFINITY),
        }
    };
    let (lo, hi) = model.b_range();
    let steps = 240;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / steps as f64).exp())
        .collect();
    let (best_i, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &b)| (i, solve(b).2))
        .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
    let mut a = grid[best_i.saturating_sub(1)].ln();
    let mut c = grid[(best_i + 1).min(steps)].ln();
    let g = 0.618_033_988_749_895;
    for _ in 0..60 {
        let x1 = c - g * (c - a);
        let x2 = a + g * (c - a);
        if solve(x1.exp()).2 <= solve(x2.exp()).2 {
            c = x2;
        } else {
            a = x1;
        }
    }
    let b = (0.5 * (a + c)).exp();
    let (p_inf, amplitude, sse) = solve(b);
    if !p_inf.is_finite() {
        return None;
    }
    let on_edge = best_i == 0 || best_i == steps;
    Some(ExtrapolationFit {
        model,
        p_inf,
        amplitude,
        rate: b,
        sse,
        well_conditioned: !on_edge && (range.0..=range.1).contains(&p_inf),
    })
}

/// Smallest `x` in `[lo, hi]` with `f(x) >= 0`, located by scanning `scan`
/// equal steps and bisecting the first sign change to `tol`.
pub fn first_upcrossing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, scan: usize, tol: f64) -> Option<f64> {
    let mut prev_x = lo;
    if f(lo) >= 0.0 {
        return Some(lo);
    }
    for i in 1..=scan {
        let x = lo + (hi - lo) * i as f64 / scan as f64;
        if f(x) >= 0.0 {
            let (mut a, mut b) = (prev_x, x);
            while b - a > tol {
                let m = 0.5 * (a + b);
                if f(m) >= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Some(b);
        }
        prev_x = x;
    }
    None
}

/// Largest `x` in `[lo, hi]` with `f(x) < 0`, scanning down from `hi` in
/// `scan` equal steps and bisecting the first sign change to `tol`. `None`
/// when `f(hi) < 0` or `f` is nonnegative on every scanned point.
pub fn last_downcrossing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, scan: usize, tol: f64) -> Option<f64> {
    if f(hi) < 0.0 {
        return None;
    }
    let mut prev_x = hi;
    for i in 1..=scan {
        let x = hi - (hi - lo) * i as f64 / scan as f64;
        if f(x) < 0.0 {
            let (mut a, mut b) = (x, prev_x);
            while b - a > tol {
                let m = 0.5 * (a + b);
                if f(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(b);
        }
        prev_x = x;
    }
    None
}
