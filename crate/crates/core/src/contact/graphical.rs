//! Graphical representation of the contact process.
//!
//! Vertex `v` carries one Poisson clock of rate `1 + deg(v) * lambda_max`;
//! each ring is a recovery mark with probability `1 / rate`, otherwise an
//! arrow to a uniform neighbor with a uniform mark `u`. The arrow transmits
//! at rate `lambda` iff `u < lambda / lambda_max`, so one realization serves
//! every `lambda <= lambda_max` and the infected sets are nested in `lambda`.
//!
//! The clock of `v` on the unit time block `[b, b + 1)` is read from a fixed
//! position of the replica's ChaCha stream, so a vertex's marks do not depend
//! on when (or whether) the simulation looks at them. Any number of rates
//! run in one pass.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{out_of_range, Result};
use crate::graph::FiniteGraph;

/// Words reserved per (vertex, unit block); a block would need millions of
/// clock rings to overrun it.
const BLOCK_WORDS: u128 = 1 << 24;
const RECOVERY: u32 = u32::MAX;
const HEALTHY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Mark {
    t: f64,
    /// Neighbor slot, or `RECOVERY`.
    slot: u32,
    u: f64,
}

#[derive(Debug, Default, Clone)]
struct Cursor {
    block: u64,
    marks: Vec<Mark>,
    idx: usize,
}

/// Per-replica outcome for one rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateOutcome {
    /// Time the last infection ended; `None` when still alive at the horizon.
    pub extinction_time: Option<f64>,
    /// Root infections (healthy to infected) after half the horizon.
    pub root_reinfections: u32,
    pub max_distance: u32,
    pub touched_boundary: bool,
}

/// Outcome of one pass over all rates.
#[derive(Debug, Clone, PartialEq)]
pub struct PassOutcome {
    pub rates: Vec<RateOutcome>,
    /// Per window, the lowest rate index whose root was infected at some time
    /// inside it (rates at or above it were too); `k` when none was.
    pub root_windows: Vec<usize>,
}

/// When a run may end before the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StopOn {
    Horizon,
    /// Every live rate has reached the boundary.
    Touched,
    /// Every live rate has infected the root inside window `j`.
    Window(usize),
}

/// Coupled runs at rates `lambda_0 <= .. <= lambda_{k-1}`. Infected sets are
/// nested in the rate, so a vertex's state is the lowest rate index at which
/// it is infected (`u32::MAX` when healthy at every rate).
pub(crate) struct Engine<'a> {
    g: &'a FiniteGraph,
    lambda_max: f64,
    /// `lambda_i / lambda_max`, ascending.
    ratios: Vec<f64>,
    dist: Vec<u32>,
    root: usize,
}

pub(crate) struct Scratch {
    level: Vec<u32>,
    cursors: Vec<Cursor>,
    heap: BinaryHeap<Reverse<(u64, u32)>>,
    touched: Vec<usize>,
}

impl Scratch {
    pub(crate) fn new(n: usize) -> Self {
        Scratch { level: vec![HEALTHY; n], cursors: vec![Cursor::default(); n], heap: BinaryHeap::new(), touched: Vec::new() }
    }
}

impl<'a> Engine<'a> {
    /// `lambdas` ascending, all `<= lambda_max`.
    pub(crate) fn new(g: &'a FiniteGraph, lambdas: &[f64], lambda_max: f64, init: &[usize]) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() >= u32::MAX as usize {
            return Err(out_of_range("need at least one rate"));
        }
        if !(lambda_max.is_finite() && lambda_max >= 0.0) {
            return Err(out_of_range(format!("lambda_max = {lambda_max}")));
        }
        if lambdas.iter().any(|&l| !(0.0..=lambda_max).contains(&l)) || lambdas.windows(2).any(|w| w[0] > w[1]) {
            return Err(out_of_range("rates must be ascending in [0, lambda_max]"));
        }
        if init.is_empty() {
            return Err(out_of_range("initial infected set is empty"));
        }
        for &v in init {
            g.check_vertex(v)?;
        }
        let ratios = lambdas.iter().map(|&l| if lambda_max > 0.0 { l / lambda_max } else { 0.0 }).collect();
        Ok(Engine { g, lambda_max, ratios, dist: g.multi_source_distances(init.iter().copied()), root: g.root() })
    }

    pub(crate) fn n_rates(&self) -> usize {
        self.ratios.len()
    }

    fn load_block(&self, rng: &mut ChaCha8Rng, v: usize, c: &mut Cursor) {
        rng.set_stream(v as u64);
        rng.set_word_pos(c.block as u128 * BLOCK_WORDS);
        c.marks.clear();
        c.idx = 0;
        let deg = self.g.degree(v);
        let rate = 1.0 + deg as f64 * self.lambda_max;
        let end = (c.block + 1) as f64;
        let mut t = c.block as f64;
        loop {
            t += -(1.0 - rng.gen::<f64>()).ln() / rate;
            if t >= end {
                break;
            }
            let x = rng.gen::<f64>() * rate;
            if x < 1.0 {
                c.marks.push(Mark { t, slot: RECOVERY, u: 0.0 });
            } else {
                let y = (x - 1.0) / self.lambda_max;
                let k = (y.floor() as usize).min(deg - 1);
                c.marks.push(Mark { t, slot: k as u32, u: (y - k as f64).clamp(0.0, 1.0) });
            }
        }
    }

    /// Move the cursor to its first mark after `after`; `None` past the horizon.
    fn settle(&self, rng: &mut ChaCha8Rng, v: usize, c: &mut Cursor, after: f64, horizon: f64) -> Option<f64> {
        loop {
            while c.idx < c.marks.len() {
                if c.marks[c.idx].t > after {
                    let t = c.marks[c.idx].t;
                    return (t <= horizon).then_some(t);
                }
                c.idx += 1;
            }
            c.block += 1;
            if c.block as f64 > horizon {
                return None;
            }
            self.load_block(rng, v, c);
        }
    }

    fn start(&self, rng: &mut ChaCha8Rng, s: &mut Scratch, v: usize, t: f64, horizon: f64) {
        let mut c = std::mem::take(&mut s.cursors[v]);
        c.block = t.floor() as u64;
        self.load_block(rng, v, &mut c);
        if let Some(next) = self.settle(rng, v, &mut c, t, horizon) {
            s.heap.push(Reverse((next.to_bits(), v as u32)));
        }
        s.cursors[v] = c;
    }

    /// One replica. `observe(t, level)` runs after every event, where vertex
    /// `v` is infected at rate index `i` iff `level[v] <= i`. With a `stop`
    /// other than `Horizon` the run ends as soon as that indicator is settled
    /// for every live rate; live rates then report no extinction.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn run(
        &self,
        s: &mut Scratch,
        init: &[usize],
        horizon: f64,
        windows: &[(f64, f64)],
        stop: StopOn,
        seed: u64,
        observe: &mut dyn FnMut(f64, &[u32]),
    ) -> PassOutcome {
        let k = self.ratios.len();
        if s.level.len() != self.g.n_vertices() {
            *s = Scratch::new(self.g.n_vertices());
        }
        for &v in &s.touched {
            s.level[v] = HEALTHY;
        }
        s.touched.clear();
        s.heap.clear();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // cnt[m]: vertices whose lowest infected rate index is m
        let mut cnt = vec![0usize; k + 1];
        // lowest rate index still alive; only ever rises
        let mut alive_from = k;
        let mut ext: Vec<Option<f64>> = vec![None; k];
        // reinfection counts as a difference array over rate indices
        let mut reinf_diff = vec![0i64; k + 1];
        let mut best_dist = vec![0u32; k + 1];
        let mut touched_from = k;
        let mut win = vec![k; windows.len()];
        let mut opened = vec![false; windows.len()];
        let half = horizon / 2.0;
        let boundary = self.g.boundary_mask();

        for &v in init {
            if s.level[v] == 0 {
                continue;
            }
            s.level[v] = 0;
            s.touched.push(v);
            cnt[0] += 1;
            best_dist[0] = best_dist[0].max(self.dist[v]);
            if boundary[v] {
                touched_from = 0;
            }
            self.start(&mut rng, s, v, 0.0, horizon);
        }
        alive_from = alive_from.min(if cnt[0] > 0 { 0 } else { k });
        let open_windows = |t: f64, level: &[u32], win: &mut [usize], opened: &mut [bool]| {
            for (j, &(a, _)) in windows.iter().enumerate() {
                if !opened[j] && a < t {
                    win[j] = win[j].min(level[self.root] as usize);
                    opened[j] = true;
                }
            }
        };

        while let Some(Reverse((tb, v))) = s.heap.pop() {
            let t = f64::from_bits(tb);
            let v = v as usize;
            open_windows(t, &s.level, &mut win, &mut opened);
            let mut c = std::mem::take(&mut s.cursors[v]);
            let m = c.marks[c.idx];
            c.idx += 1;
            if m.slot == RECOVERY {
                let old = s.level[v] as usize;
                s.level[v] = HEALTHY;
                cnt[old] -= 1;
                if old == alive_from && cnt[old] == 0 {
                    // no vertex is infected at rates below `next` any more
                    let next = (old + 1..k).find(|&i| cnt[i] > 0).unwrap_or(k);
                    for e in &mut ext[old..next] {
                        *e = Some(t);
                    }
                    alive_from = next;
                }
                s.cursors[v] = c;
            } else {
                if let Some(next) = self.settle(&mut rng, v, &mut c, t, horizon) {
                    s.heap.push(Reverse((next.to_bits(), v as u32)));
                }
                s.cursors[v] = c;
                let w = self.g.neighbors(v)[m.slot as usize] as usize;
                let first_active = self.ratios.partition_point(|&r| r <= m.u) as u32;
                let reach = s.level[v].max(first_active);
                let old = s.level[w];
                if reach < old {
                    s.level[w] = reach;
                    if old != HEALTHY {
                        cnt[old as usize] -= 1;
                    }
                    cnt[reach as usize] += 1;
                    let r = reach as usize;
                    best_dist[r] = best_dist[r].max(self.dist[w]);
                    if boundary[w] {
                        touched_from = touched_from.min(r);
                    }
                    if w == self.root {
                        if t > half {
                            reinf_diff[r] += 1;
                            reinf_diff[(old as usize).min(k)] -= 1;
                        }
                        for (j, &(a, b)) in windows.iter().enumerate() {
                            if t > a && t <= b {
                                win[j] = win[j].min(r);
                            }
                        }
                    }
                    if old == HEALTHY {
                        s.touched.push(w);
                        self.start(&mut rng, s, w, t, horizon);
                    }
                }
            }
            observe(t, &s.level);
            if alive_from == k {
                break;
            }
            let settled_from = match stop {
                StopOn::Horizon => continue,
                StopOn::Touched => touched_from,
                StopOn::Window(j) => win[j],
            };
            if settled_from <= alive_from {
                break;
            }
        }
        open_windows(f64::INFINITY, &s.level, &mut win, &mut opened);
        let mut reinf = 0i64;
        let mut far = 0u32;
        PassOutcome {
            rates: (0..k)
                .map(|i| {
                    reinf += reinf_diff[i];
                    far = far.max(best_dist[i]);
                    RateOutcome {
                        extinction_time: ext[i],
                        root_reinfections: reinf as u32,
                        max_distance: far,
                        touched_boundary: i >= touched_from,
                    }
                })
                .collect(),
            root_windows: win,
        }
    }
}
