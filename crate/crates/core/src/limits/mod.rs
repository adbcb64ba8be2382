//! Local (Benjamini-Schramm) neighborhood statistics.

mod canon;

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use canon::{canonical_signature_of, Signature, DEFAULT_SIZE_CAP};

use crate::error::{out_of_range, Error, Result};
use crate::graph::generators::{dl_ball, induced_ball};
use crate::graph::{EdgeTag, FamilySpec, FiniteGraph, GraphBuilder};
use crate::rng;

/// Ball of radius `radius` around its root.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedNeighborhood {
    pub graph: FiniteGraph,
    pub radius: usize,
}

impl RootedNeighborhood {
    pub fn root(&self) -> usize {
        self.graph.root()
    }
}

/// Induced ball of radius `r` around `v`, re-rooted at `v` (local id 0).
pub fn rooted_ball(g: &FiniteGraph, v: usize, r: usize) -> Result<RootedNeighborhood> {
    let family = FamilySpec::Custom { name: "rooted_ball".into() };
    Ok(RootedNeighborhood { graph: induced_ball(g, v, r, family)?, radius: r })
}

/// Canonical signature with the default size cap.
pub fn canonical_signature(nb: &RootedNeighborhood) -> Result<Signature> {
    canonical_signature_of(&nb.graph, DEFAULT_SIZE_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Exact,
    Sampled { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact { n_vertices: usize },
    Sampled { count: usize, seed: u64 },
    Reference { level_cutoff: usize },
}

/// Distribution of rooted `radius`-ball types.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodDist {
    pub radius: usize,
    pub probs: BTreeMap<Signature, f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistEntry {
    pub signature: String,
    pub n_vertices: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistExport {
    pub radius: usize,
    pub provenance: Provenance,
    pub entries: Vec<DistEntry>,
}

impl NeighborhoodDist {
    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn get(&self, s: &Signature) -> f64 {
        self.probs.get(s).copied().unwrap_or(0.0)
    }

    /// Entries sorted by signature hash.
    pub fn export(&self) -> DistExport {
        let mut entries: Vec<DistEntry> = self
            .probs
            .iter()
            .map(|(s, &p)| DistEntry { signature: s.hash_hex(), n_vertices: s.n_vertices(), probability: p })
            .collect();
        entries.sort_by(|a, b| a.signature.cmp(&b.signature));
        DistExport { radius: self.radius, provenance: self.provenance, entries }
    }

    fn from_counts(radius: usize, counts: BTreeMap<Signature, u64>, total: u64, provenance: Provenance) -> Self {
        let probs = counts.into_iter().map(|(s, c)| (s, c as f64 / total as f64)).collect();
        NeighborhoodDist { radius, probs, provenance }
    }
}

/// Empirical distribution of `r`-ball types around uniform vertices of `g`.
pub fn neighborhood_distribution(g: &FiniteGraph, r: usize, mode: SampleMode) -> Result<NeighborhoodDist> {
    let (centers, provenance): (Vec<usize>, Provenance) = match mode {
        SampleMode::Exact => ((0..g.n_vertices()).collect(), Provenance::Exact { n_vertices: g.n_vertices() }),
        SampleMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(out_of_range("sample count must be positive"));
            }
            let mut rng = rng::stream(seed, "bs-sample", 0);
            let n = g.n_vertices();
            ((0..count).map(|_| rng.gen_range(0..n)).collect(), Provenance::Sampled { count, seed })
        }
    };
    let sigs: Vec<Signature> = centers
        .par_iter()
        .map(|&v| canonical_signature(&rooted_ball(g, v, r)?))
        .collect::<Result<_>>()?;
    let mut counts: BTreeMap<Signature, u64> = BTreeMap::new();
    for s in sigs {
        *counts.entry(s).or_insert(0) += 1;
    }
    Ok(NeighborhoodDist::from_counts(r, counts, centers.len() as u64, provenance))
}

/// Total variation distance over the union of supports.
pub fn tv_distance(p: &NeighborhoodDist, q: &NeighborhoodDist) -> Result<f64> {
    if p.radius != q.radius {
        return Err(Error::RadiusMismatch(p.radius, q.radius));
    }
    let mut sum = 0.0;
    for (s, &a) in &p.probs {
        sum += (a - q.get(s)).abs();
    }
    for (s, &b) in &q.probs {
        if !p.probs.contains_key(s) {
            sum += b;
        }
    }
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Smallest level cutoff whose tail mass `(d-1)^{-(K+1)}` is below `1e-9`.
pub fn default_level_cutoff(d: usize) -> usize {
    let mut k = 0;
    while ((d - 1) as f64).powi(-(k as i32 + 1)) >= 1e-9 {
        k += 1;
    }
    k
}

/// Exact `r`-ball distribution of the canopy of the `d`-regular tree, with
/// the root at level `k` with probability `((d-2)/(d-1)) (d-1)^{-k}`. Mass
/// beyond `level_cutoff` is assigned to the level-`level_cutoff` type.
pub fn canopy_reference_distribution(d: usize, r: usize, level_cutoff: usize) -> Result<NeighborhoodDist> {
    if d < 3 {
        return Err(out_of_range(format!("canopy degree must be >= 3, got {d}")));
    }
    let b = (d - 1) as f64;
    let tail = b.powi(-(level_cutoff as i32 + 1));
    if tail >= 1e-9 {
        return Err(Error::CutoffTooSmall { cutoff: level_cutoff, tail });
    }
    let mut probs: BTreeMap<Signature, f64> = BTreeMap::new();
    // every level >= r has the same r-ball, so only levels 0..=r need building
    let mut deep_sig: Option<Signature> = None;
    for k in 0..=level_cutoff {
        let mut w = ((d - 2) as f64 / b) * b.powi(-(k as i32));
        if k == level_cutoff {
            w += tail;
        }
        let sig = if k <= r {
            let s = canonical_signature_of(&canopy_local_ball(d, k, r)?, DEFAULT_SIZE_CAP)?;
            if k == r {
                deep_sig = Some(s.clone());
            }
            s
        } else {
            deep_sig.clone().expect("level r type is built first")
        };
        *probs.entry(sig).or_insert(0.0) += w;
    }
    Ok(NeighborhoodDist { radius: r, probs, provenance: Provenance::Reference { level_cutoff } })
}

/// Radius-`r` ball around a level-`k` vertex of the infinite canopy of `T_d`
/// (levels count up from the leaves; every vertex has one parent, and
/// vertices above level 0 have `d-1` children).
pub fn canopy_local_ball(d: usize, k: usize, r: usize) -> Result<FiniteGraph> {
    if d < 3 {
        return Err(out_of_range(format!("canopy degree must be >= 3, got {d}")));
    }
    #[derive(Clone, Copy)]
    enum From {
        Center,
        Child,
        Parent,
    }
    let mut levels = vec![k];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut boundary = Vec::new();
    let mut queue = VecDeque::from([(0usize, 0usize, From::Center)]);
    while let Some((id, dist, from)) = queue.pop_front() {
        if dist == r {
            boundary.push(id);
            continue;
        }
        let level = levels[id];
        // reached from a child: that child is already present
        let children = match from {
            From::Child if level > 0 => d - 2,
            _ if level > 0 => d - 1,
            _ => 0,
        };
        let mut spawn = |lvl: usize, kind: From, edges: &mut Vec<(usize, usize)>| {
            let nid = levels.len();
            levels.push(lvl);
            edges.push((id, nid));
            queue.push_back((nid, dist + 1, kind));
        };
        if !matches!(from, From::Parent) {
            spawn(level + 1, From::Child, &mut edges);
        }
        for _ in 0..children {
            spawn(level - 1, From::Parent, &mut edges);
        }
    }
    let mut b = GraphBuilder::new(levels.len(), 0);
    for (u, v) in edges {
        b.add_edge(u, v, EdgeTag::Plain);
    }
    for v in boundary {
        b.mark_boundary(v);
    }
    b.labels = Some(crate::graph::Labels::new(&["level"], levels.iter().map(|&l| vec![l as i64]).collect()));
    b.build(FamilySpec::Custom { name: "canopy_local".into() })
}

/// Exact `r`-ball distribution of the local limit of the height bands
/// [`dl_ball`]`(m, n, L)` as `L` grows: the horocyclic product seen from a
/// uniform vertex. Layer `a` of a band holds `m^a n^{2L-a}` vertices, so for
/// `m > n` the root sits `k` layers above the deep `m`-side frontier with
/// probability `(1 - n/m) (n/m)^k`; `m < n` mirrors this, and `m = n` leaves
/// only the interior type.
pub fn band_limit_reference_distribution(m: usize, n: usize, r: usize) -> Result<NeighborhoodDist> {
    if m == 0 || n == 0 {
        return Err(out_of_range("band limit needs m, n >= 1"));
    }
    // the r-ball of a vertex k layers from the frontier, in a band tall enough
    // that the opposite frontier stays out of reach
    let ball_type = |k: usize| -> Result<Signature> {
        let half = (k + r + 2).div_ceil(2);
        let g = dl_ball(m, n, half)?;
        let labels = g.labels().expect("bands carry heights");
        let col = labels.field("height").expect("bands carry heights");
        let target = if m >= n { k as i64 - half as i64 } else { half as i64 - k as i64 };
        let v = (0..g.n_vertices()).find(|&v| labels.values[v][col] == target).expect("layer exists");
        canonical_signature(&rooted_ball(&g, v, r)?)
    };
    let mut probs: BTreeMap<Signature, f64> = BTreeMap::new();
    if m == n {
        probs.insert(ball_type(r + 1)?, 1.0);
    } else {
        let q = m.min(n) as f64 / m.max(n) as f64;
        for k in 0..=r {
            *probs.entry(ball_type(k)?).or_insert(0.0) += (1.0 - q) * q.powi(k as i32);
        }
        *probs.entry(ball_type(r + 1)?).or_insert(0.0) += q.powi(r as i32 + 1);
    }
    Ok(NeighborhoodDist { radius: r, probs, provenance: Provenance::Reference { level_cutoff: r + 1 } })
}

/// One size in a convergence series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub r: usize,
    pub n_vertices: usize,
    pub tv_reference: Option<f64>,
    pub tv_previous: Option<f64>,
    /// Set when the distance to the previous size exceeds the threshold.
    pub non_cauchy: bool,
}

/// Neighborhood distributions of `family.with_size(n)` across `sizes`,
/// compared with an optional reference and with the previous size.
pub fn convergence_series(
    family: &FamilySpec,
    sizes: &[usize],
    r: usize,
    mode: SampleMode,
    reference: Option<&NeighborhoodDist>,
    cauchy_threshold: f64,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(sizes.len());
    let mut prev: Option<NeighborhoodDist> = None;
    for &n in sizes {
        let g = family.with_size(n).build()?;
        let dist = neighborhood_distribution(&g, r, mode)?;
        let tv_reference = reference.map(|q| tv_distance(&dist, q)).transpose()?;
        let tv_previous = prev.as_ref().map(|q| tv_distance(&dist, q)).transpose()?;
        rows.push(ConvergenceRow {
            n,
            r,
            n_vertices: g.n_vertices(),
            tv_reference,
            tv_previous,
            non_cauchy: tv_previous.is_some_and(|t| t > cauchy_threshold),
        });
        prev = Some(dist);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{canopy, grid_box, tree_ball};

    fn path(n: usize) -> FiniteGraph {
        grid_box(&[n], false).unwrap()
    }

    #[test]
    fn radius_zero_is_single_vertex() {
        let g = tree_ball(3, 3).unwrap();
        let nb = rooted_ball(&g, 5, 0).unwrap();
        assert_eq!(nb.graph.n_vertices(), 1);
    }

    #[test]
    fn path_middle_ball_is_centered_path3() {
        let nb = rooted_ball(&path(5), 2, 1).unwrap();
        let p3 = rooted_ball(&path(3), 0, 1).unwrap();
        assert_eq!(canonical_signature(&nb).unwrap(), canonical_signature(&p3).unwrap());
    }

    #[test]
    fn tree_locality() {
        let big = rooted_ball(&tree_ball(3, 5).unwrap(), 0, 2).unwrap();
        let small = canonical_signature_of(&tree_ball(3, 2).unwrap(), DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(canonical_signature(&big).unwrap(), small);
    }

    #[test]
    fn path4_split_evenly() {
        let d = neighborhood_distribution(&path(4), 1, SampleMode::Exact).unwrap();
        assert_eq!(d.probs.len(), 2);
        assert!(d.probs.values().all(|&p| p == 0.5));
    }

    #[test]
    fn cycle_is_transitive() {
        let g = grid_box(&[8], true).unwrap();
        let d = neighborhood_distribution(&g, 1, SampleMode::Exact).unwrap();
        assert_eq!(d.probs.len(), 1);
    }

    #[test]
    fn tv_examples() {
        let g = path(4);
        let p = neighborhood_distribution(&g, 1, SampleMode::Exact).unwrap();
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        let c = neighborhood_distribution(&grid_box(&[8], true).unwrap(), 1, SampleMode::Exact).unwrap();
        // cycle type coincides with the path interior type at radius 1
        assert!((tv_distance(&p, &c).unwrap() - 0.5).abs() < 1e-15);
        let t = neighborhood_distribution(&tree_ball(3, 1).unwrap(), 1, SampleMode::Exact).unwrap();
        let star_center = neighborhood_distribution(&grid_box(&[8], true).unwrap(), 0, SampleMode::Exact).unwrap();
        assert_eq!(tv_distance(&t, &c).unwrap(), 1.0);
        assert_eq!(tv_distance(&t, &star_center), Err(Error::RadiusMismatch(1, 0)));
    }

    #[test]
    fn canopy_reference_masses() {
        let k = default_level_cutoff(3);
        assert_eq!(k, 29);
        assert!(matches!(canopy_reference_distribution(3, 2, 10), Err(Error::CutoffTooSmall { .. })));
        let d = canopy_reference_distribution(3, 2, k).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        // levels 0, 1 and >= 2 give three types
        assert_eq!(d.probs.len(), 3);
        let mut masses: Vec<f64> = d.probs.values().copied().collect();
        masses.sort_by(f64::total_cmp);
        assert!((masses[0] - 0.25).abs() < 1e-12 && (masses[2] - 0.5).abs() < 1e-12);
        let d0 = canopy_reference_distribution(3, 0, k).unwrap();
        assert_eq!(d0.probs.len(), 1);
    }

    #[test]
    fn canopy_local_ball_matches_finite_canopy() {
        // leaf of a deep finite canopy sees the same radius-3 ball
        let g = canopy(3, 6).unwrap();
        let finite = rooted_ball(&g, g.root(), 3).unwrap();
        let local = canopy_local_ball(3, 0, 3).unwrap();
        assert_eq!(canonical_signature(&finite).unwrap(), canonical_signature_of(&local, 512).unwrap());
        assert_eq!(local.n_vertices(), 1 + 1 + 2 + 2);
    }

    #[test]
    fn size_cap_enforced() {
        let g = tree_ball(3, 8).unwrap();
        assert!(matches!(canonical_signature_of(&g, 512), Err(Error::SizeCapExceeded { .. })));
    }

    #[test]
    fn band_reference_matches_tall_band() {
        let reference = band_limit_reference_distribution(3, 2, 1).unwrap();
        assert!((reference.total_mass() - 1.0).abs() < 1e-12);
        let tv = |l| tv_distance(&neighborhood_distribution(&dl_ball(3, 2, l).unwrap(), 1, SampleMode::Exact).unwrap(), &reference).unwrap();
        let (a, b) = (tv(2), tv(4));
        assert!(b < a && b < 0.05, "{a} {b}");
    }
}
