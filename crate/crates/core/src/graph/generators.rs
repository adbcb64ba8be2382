//! Deterministic generators for every supported graph family.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EdgeTag, FamilySpec, FiniteGraph, GraphBuilder, Labels};
use crate::error::{out_of_range, Error, Result};

/// Ball of radius `n` around a vertex of the `d`-regular tree.
pub fn tree_ball(d: usize, n: usize) -> Result<FiniteGraph> {
    if d < 3 {
        return Err(out_of_range(format!("tree_ball: d = {d} < 3")));
    }
    let mut levels = vec![0i64];
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    for depth in 1..=n {
        let mut next = Vec::with_capacity(frontier.len() * (d - 1));
        for &u in &frontier {
            let children = if depth == 1 { d } else { d - 1 };
            for _ in 0..children {
                let v = levels.len();
                levels.push(depth as i64);
                edges.push((u, v));
                next.push(v);
            }
        }
        frontier = next;
    }
    let mut b = GraphBuilder::new(levels.len(), 0);
    for (u, v) in edges {
        b.add_edge(u, v, EdgeTag::Plain);
    }
    for &v in &frontier {
        b.mark_boundary(v);
    }
    b.labels = Some(Labels::new(&["depth"], levels.into_iter().map(|l| vec![l]).collect()));
    b.build(FamilySpec::TreeBall { d, radius: n })
}

/// Box in `Z^dims.len()` with optional periodic wrap-around.
pub fn grid_box(dims: &[usize], periodic: bool) -> Result<FiniteGraph> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(out_of_range("grid_box: every side must be >= 1"));
    }
    let n: usize = dims.iter().product();
    let mut strides = vec![1usize; dims.len()];
    for k in 1..dims.len() {
        strides[k] = strides[k - 1] * dims[k - 1];
    }
    let coords = |idx: usize| -> Vec<i64> {
        dims.iter().zip(&strides).map(|(&s, &st)| ((idx / st) % s) as i64).collect()
    };
    let root: usize = dims.iter().zip(&strides).map(|(&s, &st)| (s / 2) * st).sum();
    let mut b = GraphBuilder::new(n, root);
    let mut values = Vec::with_capacity(n);
    for idx in 0..n {
        let c = coords(idx);
        for (k, (&s, &st)) in dims.iter().zip(&strides).enumerate() {
            let x = c[k] as usize;
            if x + 1 < s {
                b.add_edge(idx, idx + st, EdgeTag::Plain);
            } else if periodic && s > 2 {
                b.add_edge(idx, idx - x * st, EdgeTag::Plain);
            }
            if !periodic && (x == 0 || x + 1 == s) {
                b.mark_boundary(idx);
            }
        }
        values.push(c);
    }
    let schema: Vec<String> = (0..dims.len()).map(|k| format!("x{k}")).collect();
    b.labels = Some(Labels { schema, values });
    b.build(FamilySpec::GridBox { dims: dims.to_vec(), periodic })
}

/// Path `0..=len` rooted at `0` with boundary `{len}`.
pub fn half_line(len: usize) -> Result<FiniteGraph> {
    if len == 0 {
        return Err(out_of_range("half_line: len must be >= 1"));
    }
    let mut b = GraphBuilder::new(len + 1, 0);
    for i in 0..len {
        b.add_edge(i, i + 1, EdgeTag::Plain);
    }
    b.mark_boundary(len);
    b.labels = Some(Labels::new(&["z"], (0..=len as i64).map(|z| vec![z]).collect()));
    b.build(FamilySpec::HalfLine { len })
}

/// Truncated canopy of `T_d`: the complete `(d-1)`-ary tree of height `k`,
/// rooted at its leftmost leaf, with the apex as the only boundary vertex.
pub fn canopy(d: usize, k: usize) -> Result<FiniteGraph> {
    if d < 3 || k == 0 {
        return Err(out_of_range(format!("canopy: need d >= 3 and height >= 1 (got {d}, {k})")));
    }
    let branching = d - 1;
    // vertices indexed top-down: apex = 0, children of v are branching*v+1..
    let n = complete_tree_size(branching, k);
    let mut b = GraphBuilder::new(n, 0);
    let mut level = vec![0i64; n];
    level[0] = k as i64;
    for v in 0..n {
        for c in 1..=branching {
            let w = branching * v + c;
            if w < n {
                b.add_edge(v, w, EdgeTag::Plain);
                level[w] = level[v] - 1;
            }
        }
    }
    // leftmost leaf
    let mut leaf = 0;
    for _ in 0..k {
        leaf = branching * leaf + 1;
    }
    let mut b = GraphBuilder { root: leaf, ..b };
    b.mark_boundary(0);
    b.labels = Some(Labels::new(&["level"], level.into_iter().map(|l| vec![l]).collect()));
    b.build(FamilySpec::Canopy { d, height: k })
}

fn complete_tree_size(branching: usize, height: usize) -> usize {
    let mut total = 0;
    let mut width = 1;
    for _ in 0..=height {
        total += width;
        width *= branching;
    }
    total
}

/// Cartesian product `a x b`. Edges coming from `b` are tagged [`EdgeTag::Fiber`].
pub fn cartesian_product(a: &FiniteGraph, b: &FiniteGraph) -> Result<FiniteGraph> {
    let (na, nb) = (a.n_vertices(), b.n_vertices());
    let id = |i: usize, j: usize| i * nb + j;
    let mut builder = GraphBuilder::new(na * nb, id(a.root(), b.root()));
    for (u, v, t) in a.edges() {
        for j in 0..nb {
            builder.add_edge(id(u, j), id(v, j), t);
        }
    }
    for (u, v, _) in b.edges() {
        for i in 0..na {
            builder.add_edge(id(i, u), id(i, v), EdgeTag::Fiber);
        }
    }
    for i in 0..na {
        for j in 0..nb {
            if a.is_boundary(i) || b.is_boundary(j) {
                builder.mark_boundary(id(i, j));
            }
        }
    }
    let label_parts = |g: &FiniteGraph, prefix: &str| -> (Vec<String>, Vec<Vec<i64>>) {
        match g.labels() {
            Some(l) => (
                l.schema.iter().map(|s| format!("{prefix}.{s}")).collect(),
                l.values.clone(),
            ),
            None => (vec![format!("{prefix}.id")], (0..g.n_vertices() as i64).map(|v| vec![v]).collect()),
        }
    };
    let (mut schema, va) = label_parts(a, "a");
    let (sb, vb) = label_parts(b, "b");
    schema.extend(sb);
    let mut values = Vec::with_capacity(na * nb);
    for x in &va {
        for y in &vb {
            let mut row = x.clone();
            row.extend_from_slice(y);
            values.push(row);
        }
    }
    builder.labels = Some(Labels { schema, values });
    builder.build(FamilySpec::product(a.family().clone(), b.family().clone()))
}

/// Replace every fiber edge by a path of `n` edges. The `n - 1` new vertices
/// are ordinary sites; they are boundary iff both original endpoints are.
pub fn stretch_fiber(g: &FiniteGraph, n: usize) -> Result<FiniteGraph> {
    if n == 0 {
        return Err(out_of_range("stretch must be >= 1"));
    }
    let edges = g.edges();
    let n_fiber = edges.iter().filter(|e| e.2 == EdgeTag::Fiber).count();
    if n_fiber == 0 {
        return Err(Error::NoFiberEdges);
    }
    let total = g.n_vertices() + n_fiber * (n - 1);
    let mut b = GraphBuilder::new(total, g.root());
    let (mut schema, mut values) = match g.labels() {
        Some(l) => (l.schema.clone(), l.values.clone()),
        None => (vec!["id".to_string()], (0..g.n_vertices() as i64).map(|v| vec![v]).collect()),
    };
    schema.push("stretch_pos".into());
    for row in values.iter_mut() {
        row.push(0);
    }
    for &v in g.boundary() {
        b.mark_boundary(v);
    }
    let mut next = g.n_vertices();
    for (u, v, t) in edges {
        if t != EdgeTag::Fiber || n == 1 {
            b.add_edge(u, v, t);
            continue;
        }
        let mut prev = u;
        for pos in 1..n {
            let w = next;
            next += 1;
            let mut row = values[u].clone();
            *row.last_mut().unwrap() = pos as i64;
            values.push(row);
            if g.is_boundary(u) && g.is_boundary(v) {
                b.mark_boundary(w);
            }
            b.add_edge(prev, w, EdgeTag::Fiber);
            prev = w;
        }
        b.add_edge(prev, v, EdgeTag::Fiber);
    }
    b.labels = Some(Labels { schema, values });
    b.build(FamilySpec::stretched(g.family().clone(), n))
}

/// Vertex set shared by the Diestel-Leader band and the horocyclic canopy
/// product: pairs `(x, y)` from an `m`-ary tree and an `n`-ary tree of depth
/// `2 * half` with `depth(x) + depth(y) = 2 * half`, adjacent when one
/// coordinate moves up and the other down.
struct HorocyclicBand {
    m: u64,
    n: u64,
    span: usize,
    offsets: Vec<usize>,
}

impl HorocyclicBand {
    fn new(m: usize, n: usize, half: usize) -> Result<Self> {
        let span = 2 * half;
        let (m, n) = (m as u64, n as u64);
        let mut offsets = vec![0usize];
        for a in 0..=span {
            let count = m
                .checked_pow(a as u32)
                .and_then(|x| x.checked_mul(n.checked_pow((span - a) as u32)?))
                .filter(|&c| c < (1 << 31))
                .ok_or_else(|| out_of_range("horocyclic band too large"))?;
            offsets.push(offsets[a] + count as usize);
        }
        if *offsets.last().unwrap() >= (1 << 31) {
            return Err(out_of_range("horocyclic band too large"));
        }
        Ok(HorocyclicBand { m, n, span, offsets })
    }

    fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// `a` = depth of x below the top of its tree, `i` / `j` = level indices.
    fn id(&self, a: usize, i: u64, j: u64) -> usize {
        self.offsets[a] + (i * self.n.pow((self.span - a) as u32) + j) as usize
    }

    fn build(
        &self,
        root: (usize, u64, u64),
        schema: &[&str],
        label: impl Fn(usize, u64, u64) -> Vec<i64>,
        family: FamilySpec,
    ) -> Result<FiniteGraph> {
        let mut b = GraphBuilder::new(self.len(), self.id(root.0, root.1, root.2));
        let mut values = Vec::with_capacity(self.len());
        for a in 0..=self.span {
            let wx = self.m.pow(a as u32);
            let wy = self.n.pow((self.span - a) as u32);
            for i in 0..wx {
                for j in 0..wy {
                    let u = self.id(a, i, j);
                    values.push(label(a, i, j));
                    if a == 0 || a == self.span {
                        b.mark_boundary(u);
                    }
                    if a >= 1 {
                        // x moves up, y moves down into one of its n children
                        for c in 0..self.n {
                            b.add_edge(u, self.id(a - 1, i / self.m, j * self.n + c), EdgeTag::Plain);
                        }
                    }
                }
            }
        }
        b.labels = Some(Labels::new(schema, values));
        b.build(family)
    }
}

/// Height-band truncation of `DL(m, n)`.
///
/// The first coordinate lives in the subtree of the `(m+1)`-regular tree below
/// the height-`L` ancestor of its root, restricted to heights `[-L, L]`; the
/// second likewise in the `(n+1)`-regular tree with opposite height. Both root
/// rays are the leftmost descending paths. The boundary is the height band's
/// frontier `|h| = L`.
pub fn dl_ball(m: usize, n: usize, l: usize) -> Result<FiniteGraph> {
    if m == 0 || n == 0 || l == 0 {
        return Err(out_of_range("dl_ball: m, n, L must be >= 1"));
    }
    let band = HorocyclicBand::new(m, n, l)?;
    band.build(
        (l, 0, 0),
        &["height", "x", "y"],
        |a, i, j| vec![l as i64 - a as i64, i as i64, j as i64],
        FamilySpec::DlBall { m, n, height: l },
    )
}

/// Horocyclic product of a truncated `m`-branching canopy and a truncated
/// `n`-branching canopy, both of height `2L`, with `level(x) + level(y) = 2L`.
///
/// The root pair sits at level `L` on both distinguished spines, and the
/// boundary is the set of pairs containing a truncated apex. As finite graphs
/// these truncations coincide with [`dl_ball`]; only the labels differ.
pub fn horocyclic_canopy_product(m: usize, n: usize, l: usize) -> Result<FiniteGraph> {
    if m == 0 || n == 0 || l == 0 {
        return Err(out_of_range("horocyclic_canopy: m, n, L must be >= 1"));
    }
    let band = HorocyclicBand::new(m, n, l)?;
    let span = 2 * l as i64;
    band.build(
        (l, 0, 0),
        &["level_a", "level_b", "x", "y"],
        |a, i, j| vec![span - a as i64, a as i64, i as i64, j as i64],
        FamilySpec::HorocyclicCanopy { m, n, height: l },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Letter {
    Lattice(i32, i32),
    Flip,
}

/// Ball of radius `r` in the Cayley graph of `Z^2 * Z/2` with generators
/// `(±1, 0), (0, ±1), t`. Words are kept in normal form (alternating nonzero
/// lattice blocks and `t`); `t`-edges are tagged [`EdgeTag::Cut`].
pub fn free_product_z2_edge_ball(r: usize) -> Result<FiniteGraph> {
    if r == 0 {
        return Err(out_of_range("free_product_z2_edge: radius must be >= 1"));
    }
    const MOVES: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let times = |w: &[Letter], g: Option<(i32, i32)>| -> Vec<Letter> {
        let mut w = w.to_vec();
        match g {
            None => {
                if w.last() == Some(&Letter::Flip) {
                    w.pop();
                } else {
                    w.push(Letter::Flip);
                }
            }
            Some((dx, dy)) => match w.last().copied() {
                Some(Letter::Lattice(x, y)) => {
                    let (x, y) = (x + dx, y + dy);
                    w.pop();
                    if (x, y) != (0, 0) {
                        w.push(Letter::Lattice(x, y));
                    }
                }
                _ => w.push(Letter::Lattice(dx, dy)),
            },
        }
        w
    };
    let mut index: HashMap<Vec<Letter>, usize> = HashMap::new();
    let mut words: Vec<Vec<Letter>> = vec![Vec::new()];
    let mut dist = vec![0usize];
    index.insert(Vec::new(), 0);
    let mut edges = Vec::new();
    let mut head = 0;
    while head < words.len() {
        let u = head;
        head += 1;
        let gens = MOVES.iter().map(|&m| Some(m)).chain(std::iter::once(None));
        for g in gens {
            let w = times(&words[u], g);
            let tag = if g.is_none() { EdgeTag::Cut } else { EdgeTag::Plain };
            let v = match index.get(&w) {
                Some(&v) => v,
                None => {
                    if dist[u] == r {
                        continue;
                    }
                    let v = words.len();
                    index.insert(w.clone(), v);
                    words.push(w);
                    dist.push(dist[u] + 1);
                    v
                }
            };
            if u < v {
                edges.push((u, v, tag));
            }
        }
    }
    let mut b = GraphBuilder::new(words.len(), 0);
    for (u, v, t) in edges {
        b.add_edge(u, v, t);
    }
    let mut values = Vec::with_capacity(words.len());
    for (v, w) in words.iter().enumerate() {
        if dist[v] == r {
            b.mark_boundary(v);
        }
        let flips = w.iter().filter(|l| **l == Letter::Flip).count() as i64;
        values.push(vec![dist[v] as i64, flips]);
    }
    b.labels = Some(Labels::new(&["dist", "flips"], values));
    b.build(FamilySpec::FreeProductZ2Edge { radius: r })
}

/// Combinatorial ball of radius `n` in the `{3, q}` triangulation.
///
/// Layer `k + 1` is grown around the cycle of layer `k`: each cycle vertex
/// receives `q - deg` outward neighbors forming a fan, consecutive fans share
/// their end vertex, so every new face is a triangle and every vertex of layer
/// `k` reaches degree exactly `q`.
pub fn hyperbolic_ball(q: usize, n: usize) -> Result<FiniteGraph> {
    if q < 7 {
        return Err(out_of_range(format!("hyperbolic_ball: q = {q} < 7")));
    }
    let mut degree = vec![0usize];
    let mut layer = vec![0i64];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let add_vertex = |degree: &mut Vec<usize>, layer: &mut Vec<i64>, k: i64| {
        degree.push(0);
        layer.push(k);
        degree.len() - 1
    };
    let connect = |degree: &mut Vec<usize>, edges: &mut Vec<(usize, usize)>, u: usize, v: usize| {
        degree[u] += 1;
        degree[v] += 1;
        edges.push((u, v));
    };
    let mut cycle: Vec<usize> = Vec::new();
    if n >= 1 {
        for _ in 0..q {
            let v = add_vertex(&mut degree, &mut layer, 1);
            connect(&mut degree, &mut edges, 0, v);
            cycle.push(v);
        }
        for i in 0..q {
            connect(&mut degree, &mut edges, cycle[i], cycle[(i + 1) % q]);
        }
    }
    for k in 2..=n {
        let len = cycle.len();
        // outer[i] = fan of new neighbors of cycle[i]; fan i ends where fan i+1 starts
        let mut outer: Vec<usize> = Vec::new();
        let mut first_of_fan = Vec::with_capacity(len);
        #[allow(clippy::needless_range_loop)]
        for i in 0..len {
            let v = cycle[i];
            let need = q - degree[v];
            debug_assert!(need >= 2);
            let start = if i == 0 {
                let s = add_vertex(&mut degree, &mut layer, k as i64);
                outer.push(s);
                s
            } else {
                *outer.last().unwrap()
            };
            first_of_fan.push(start);
            connect(&mut degree, &mut edges, v, start);
            let mut prev = start;
            for step in 1..need {
                let last_fan_closes = i + 1 == len && step + 1 == need;
                let w = if last_fan_closes {
                    outer[0]
                } else {
                    let w = add_vertex(&mut degree, &mut layer, k as i64);
                    outer.push(w);
                    w
                };
                connect(&mut degree, &mut edges, v, w);
                if !(last_fan_closes && w == prev) {
                    connect(&mut degree, &mut edges, prev, w);
                }
                prev = w;
            }
        }
        cycle = outer;
    }
    let total = degree.len();
    let mut b = GraphBuilder::new(total, 0);
    for (u, v) in edges {
        b.add_edge(u, v, EdgeTag::Plain);
    }
    for (v, &h) in layer.iter().enumerate() {
        if h == n as i64 {
            b.mark_boundary(v);
        }
    }
    b.labels = Some(Labels::new(&["layer"], layer.into_iter().map(|l| vec![l]).collect()));
    b.build(FamilySpec::HyperbolicBall { q, radius: n })
}

/// Induced ball of radius `r` around a seeded uniform vertex of `g`; the
/// boundary is the sphere at distance exactly `r`.
pub fn local_view(g: &FiniteGraph, r: usize, seed: u64) -> Result<FiniteGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = rng.gen_range(0..g.n_vertices());
    let family = FamilySpec::LocalView { inner: Box::new(g.family().clone()), radius: r, seed };
    induced_ball(g, center, r, family)
}

/// Induced subgraph on the vertices within distance `r` of `center`, rooted at
/// `center`, with the distance-`r` sphere as boundary.
pub(crate) fn induced_ball(g: &FiniteGraph, center: usize, r: usize, family: FamilySpec) -> Result<FiniteGraph> {
    g.check_vertex(center)?;
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut order = vec![center];
    let mut dist = vec![0usize];
    local.insert(center, 0);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        let du = dist[head];
        head += 1;
        if du == r {
            continue;
        }
        for &w in g.neighbors(u) {
            let w = w as usize;
            if let std::collections::hash_map::Entry::Vacant(e) = local.entry(w) {
                e.insert(order.len());
                order.push(w);
                dist.push(du + 1);
            }
        }
    }
    let mut b = GraphBuilder::new(order.len(), 0);
    for (i, &u) in order.iter().enumerate() {
        for (&w, &t) in g.neighbors(u).iter().zip(g.neighbor_tags(u)) {
            if let Some(&j) = local.get(&(w as usize)) {
                if i < j {
                    b.add_edge(i, j, t);
                }
            }
        }
        if dist[i] == r {
            b.mark_boundary(i);
        }
    }
    if let Some(l) = g.labels() {
        b.labels = Some(Labels {
            schema: l.schema.clone(),
            values: order.iter().map(|&u| l.values[u].clone()).collect(),
        });
    }
    b.build(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degree_hist(g: &FiniteGraph) -> Vec<usize> {
        let mut h = vec![0; g.max_degree() + 1];
        for v in 0..g.n_vertices() {
            h[g.degree(v)] += 1;
        }
        h
    }

    #[test]
    fn tree_ball_examples() {
        let g = tree_ball(3, 0).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (1, 0));
        assert_eq!(g.boundary(), &[g.root()]);

        let g = tree_ball(3, 2).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges(), g.boundary().len()), (10, 9, 6));
        assert_eq!(tree_ball(4, 3).unwrap().n_vertices(), 53);
        assert!(tree_ball(2, 3).is_err());
    }

    #[test]
    fn tree_ball_closed_form_counts() {
        for d in 3..=5usize {
            for n in 0..=10u32 {
                if d == 5 && n > 8 {
                    continue;
                }
                let expect = 1 + d * ((d - 1).pow(n) - 1) / (d - 2);
                assert_eq!(tree_ball(d, n as usize).unwrap().n_vertices(), expect, "d={d} n={n}");
            }
        }
    }

    #[test]
    fn grid_examples() {
        let g = grid_box(&[3, 3], false).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (9, 12));
        assert_eq!(g.degree(g.root()), 4);

        let g = grid_box(&[5], false).unwrap();
        assert_eq!(g.n_vertices(), 5);
        assert_eq!(g.boundary().len(), 2);
        let ends: Vec<usize> = (0..5).filter(|&v| g.degree(v) == 1).collect();
        let mut b = g.boundary().to_vec();
        b.sort();
        assert_eq!(b, ends);
        assert_eq!(g.distances_from(g.root()).iter().max(), Some(&2));

        let g = grid_box(&[4, 4], true).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (16, 32));
        assert!((0..16).all(|v| g.degree(v) == 4));
        assert!(g.boundary().is_empty());
    }

    #[test]
    fn canopy_examples() {
        let g = canopy(3, 3).unwrap();
        assert_eq!(g.n_vertices(), 15);
        assert_eq!(g.degree(g.root()), 1);
        assert_eq!(g.boundary().len(), 1);
        assert_eq!(g.distances_from(g.root())[g.boundary()[0]], 3);

        let g = canopy(3, 1).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(degree_hist(&g), vec![0, 2, 1]);
        assert_eq!(canopy(4, 2).unwrap().n_vertices(), 13);
    }

    #[test]
    fn product_examples() {
        let p2 = grid_box(&[2], false).unwrap();
        let c4 = cartesian_product(&p2, &p2).unwrap();
        assert_eq!((c4.n_vertices(), c4.n_edges()), (4, 4));
        assert!((0..4).all(|v| c4.degree(v) == 2));

        let t = tree_ball(3, 1).unwrap();
        let p3 = grid_box(&[3], false).unwrap();
        let g = cartesian_product(&t, &p3).unwrap();
        assert_eq!(g.n_vertices(), 12);
        assert_eq!(g.degree(g.root()), 5);
        assert_eq!(g.count_tag(EdgeTag::Fiber), 4 * 2);

        let k1 = grid_box(&[1], false).unwrap();
        let h = cartesian_product(&k1, &t).unwrap();
        assert_eq!((h.n_vertices(), h.n_edges()), (t.n_vertices(), t.n_edges()));
    }

    #[test]
    fn product_degree_additivity() {
        let a = tree_ball(3, 2).unwrap();
        let b = grid_box(&[4], false).unwrap();
        let g = cartesian_product(&a, &b).unwrap();
        let l = g.labels().unwrap();
        let (ia, ib) = (l.field("a.depth").unwrap(), l.field("b.x0").unwrap());
        for v in 0..g.n_vertices() {
            let depth = l.values[v][ia];
            let x = l.values[v][ib];
            let da = if depth == 0 { 3 } else if depth == 2 { 1 } else { 3 };
            let db = if x == 0 || x == 3 { 1 } else { 2 };
            assert_eq!(g.degree(v), da + db);
        }
    }

    #[test]
    fn stretch_examples() {
        let k2 = FiniteGraph::from_edges(
            2,
            &[(0, 1, EdgeTag::Fiber)],
            0,
            &[1],
            None,
            FamilySpec::Custom { name: "k2".into() },
        )
        .unwrap();
        let p = stretch_fiber(&k2, 3).unwrap();
        assert_eq!((p.n_vertices(), p.n_edges()), (4, 3));
        assert_eq!(degree_hist(&p), vec![0, 2, 2]);

        let p2 = grid_box(&[2], false).unwrap();
        let c4 = cartesian_product(&p2, &p2).unwrap();
        let s = stretch_fiber(&c4, 2).unwrap();
        assert_eq!((s.n_vertices(), s.n_edges()), (6, 6));
        let same = stretch_fiber(&c4, 1).unwrap();
        assert_eq!((same.n_vertices(), same.n_edges()), (4, 4));

        assert_eq!(stretch_fiber(&p2, 2), Err(Error::NoFiberEdges));
        assert!(stretch_fiber(&c4, 0).is_err());
    }

    /// Oracle: list tree neighbors of each coordinate separately and keep the
    /// pairs whose heights still sum to zero inside the band.
    fn dl_degree_oracle(m: u64, n: u64, l: i64, h: i64, i: u64, j: u64) -> usize {
        let tree_nbrs = |b: u64, h: i64, i: u64| -> Vec<(i64, u64)> {
            let mut out = Vec::new();
            if h < l {
                out.push((h + 1, i / b));
            }
            if h > -l {
                out.extend((0..b).map(|c| (h - 1, i * b + c)));
            }
            out
        };
        let xs = tree_nbrs(m, h, i);
        let ys = tree_nbrs(n, -h, j);
        xs.iter().flat_map(|x| ys.iter().map(move |y| (x, y))).filter(|(x, y)| x.0 + y.0 == 0).count()
    }

    #[test]
    fn dl_ball_degrees() {
        for &(m, n, l) in &[(1usize, 1usize, 3usize), (3, 2, 2), (2, 2, 2), (3, 2, 3)] {
            let g = dl_ball(m, n, l).unwrap();
            let labels = g.labels().unwrap();
            for v in 0..g.n_vertices() {
                let row = &labels.values[v];
                let (h, i, j) = (row[0], row[1] as u64, row[2] as u64);
                assert_eq!(g.degree(v), dl_degree_oracle(m as u64, n as u64, l as i64, h, i, j));
                if !g.is_boundary(v) {
                    assert_eq!(g.degree(v), m + n);
                }
            }
        }
        assert_eq!(dl_ball(3, 2, 2).unwrap().degree(0), 5);
    }

    #[test]
    fn horocyclic_examples() {
        let g = horocyclic_canopy_product(1, 1, 3).unwrap();
        assert!((0..g.n_vertices()).filter(|&v| !g.is_boundary(v)).all(|v| g.degree(v) == 2));
        let g = horocyclic_canopy_product(3, 2, 4).unwrap();
        assert!((0..g.n_vertices()).filter(|&v| !g.is_boundary(v)).all(|v| g.degree(v) == 5));
        for (m, n) in [(1, 1), (2, 3), (3, 2)] {
            let g = horocyclic_canopy_product(m, n, 1).unwrap();
            g.validate().unwrap();
            assert!(!g.is_boundary(g.root()));
        }
    }

    #[test]
    fn free_product_examples() {
        let g = free_product_z2_edge_ball(1).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (6, 5));
        let g = free_product_z2_edge_ball(2).unwrap();
        let t = g
            .neighbors(g.root())
            .iter()
            .zip(g.neighbor_tags(g.root()))
            .find(|(_, &tag)| tag == EdgeTag::Cut)
            .map(|(&v, _)| v as usize)
            .unwrap();
        assert_eq!(g.degree(t), 5);
        for v in 0..g.n_vertices() {
            if !g.is_boundary(v) {
                assert_eq!(g.degree(v), 5);
            }
        }
    }

    #[test]
    fn hyperbolic_examples() {
        let g = hyperbolic_ball(7, 1).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (8, 14));
        assert_eq!(hyperbolic_ball(7, 0).unwrap().n_vertices(), 1);
        let g = hyperbolic_ball(7, 3).unwrap();
        assert_eq!(g.n_vertices(), 1 + 7 + 21 + 56);
    }

    #[test]
    fn local_view_is_a_ball() {
        let g = tree_ball(3, 6).unwrap();
        let h = local_view(&g, 2, 11).unwrap();
        h.validate().unwrap();
        let d = h.distances_from(h.root());
        assert!(d.iter().all(|&x| x <= 2));
        assert!(h.boundary().iter().all(|&b| d[b] == 2));
    }
}
