//! Rooted finite graphs with a designated truncation boundary.
//!
//! Every generator in [`generators`] funnels through [`GraphBuilder`], which
//! validates the edge set and renumbers vertices in breadth-first order from
//! the root. Adjacency is stored in compressed sparse rows so that the
//! percolation and walk kernels can iterate neighbors without pointer chasing.

mod export;
mod family;
pub mod generators;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use export::{read_graph, write_graph, GraphExport};
pub use family::FamilySpec;

/// Tag carried by an edge through products and stretching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    Plain,
    /// Edge of the second factor of a Cartesian product (the `Z` direction).
    Fiber,
    /// Edge generated by the order-two generator of a free product.
    Cut,
}

/// Per-vertex integer coordinates with named fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub schema: Vec<String>,
    pub values: Vec<Vec<i64>>,
}

impl Labels {
    pub fn new(schema: &[&str], values: Vec<Vec<i64>>) -> Self {
        Labels {
            schema: schema.iter().map(|s| s.to_string()).collect(),
            values,
        }
    }

    /// Index of a named field in the schema.
    pub fn field(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s == name)
    }
}

/// Immutable rooted finite graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    tags: Vec<EdgeTag>,
    root: usize,
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
    labels: Option<Labels>,
    family: FamilySpec,
}

impl FiniteGraph {
    /// Assemble a graph from explicit parts, keeping vertex ids as given.
    pub fn from_edges(
        n_vertices: usize,
        edges: &[(usize, usize, EdgeTag)],
        root: usize,
        boundary: &[usize],
        labels: Option<Labels>,
        family: FamilySpec,
    ) -> Result<Self> {
        let mut b = GraphBuilder::new(n_vertices, root);
        for &(u, v, t) in edges {
            b.add_edge(u, v, t);
        }
        for &v in boundary {
            if v >= n_vertices {
                return Err(Error::InvalidVertex { vertex: v, n_vertices });
            }
            b.mark_boundary(v);
        }
        b.labels = labels;
        b.finish(family, false)
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Tags parallel to [`FiniteGraph::neighbors`].
    #[inline]
    pub fn neighbor_tags(&self, v: usize) -> &[EdgeTag] {
        &self.tags[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n_vertices()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Sorted boundary vertex ids.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    #[inline]
    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.is_boundary
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn family(&self) -> &FamilySpec {
        &self.family
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n_vertices() {
            Ok(())
        } else {
            Err(Error::InvalidVertex { vertex: v, n_vertices: self.n_vertices() })
        }
    }

    /// Edges as `(u, v, tag)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, EdgeTag)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for u in 0..self.n_vertices() {
            for (&v, &t) in self.neighbors(u).iter().zip(self.neighbor_tags(u)) {
                if (u as u32) < v {
                    out.push((u, v as usize, t));
                }
            }
        }
        out
    }

    pub fn count_tag(&self, tag: EdgeTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count() / 2
    }

    /// Breadth-first distances from `src`; unreachable vertices get `u32::MAX`.
    pub fn distances_from(&self, src: usize) -> Vec<u32> {
        self.multi_source_distances(std::iter::once(src))
    }

    /// Distance from every vertex to the nearest source.
    pub fn multi_source_distances(&self, sources: impl IntoIterator<Item = usize>) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n_vertices()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            for &w in self.neighbors(u) {
                let w = w as usize;
                if dist[w] == u32::MAX {
                    dist[w] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Same graph with a different root and boundary; ids are kept.
    pub fn rerooted(&self, root: usize, boundary: &[usize], family: FamilySpec) -> Result<Self> {
        self.check_vertex(root)?;
        let mut is_boundary = vec![false; self.n_vertices()];
        for &b in boundary {
            self.check_vertex(b)?;
            is_boundary[b] = true;
        }
        let boundary: Vec<usize> = (0..self.n_vertices()).filter(|&v| is_boundary[v]).collect();
        Ok(FiniteGraph {
            root,
            boundary,
            is_boundary,
            family,
            ..self.clone()
        })
    }

    /// Check the structural invariants every graph must satisfy.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vertices();
        if self.root >= n {
            return Err(Error::InvalidGraph(format!("root {} out of range", self.root)));
        }
        for u in 0..n {
            let nb = self.neighbors(u);
            for w in nb.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidGraph(format!("neighbors of {u} unsorted or duplicated")));
                }
            }
            for &v in nb {
                let v = v as usize;
                if v == u {
                    return Err(Error::InvalidGraph(format!("self-loop at {u}")));
                }
                if self.neighbors(v).binary_search(&(u as u32)).is_err() {
                    return Err(Error::InvalidGraph(format!("asymmetric edge {u}->{v}")));
                }
            }
        }
        if self.distances_from(self.root).contains(&u32::MAX) {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        Ok(())
    }
}

/// Collects raw edges, validates them and emits a [`FiniteGraph`].
#[derive(Debug, Clone)]
pub(crate) struct GraphBuilder {
    n: usize,
    edges: Vec<(usize, usize, EdgeTag)>,
    root: usize,
    boundary: Vec<bool>,
    pub(crate) labels: Option<Labels>,
}

impl GraphBuilder {
    pub(crate) fn new(n: usize, root: usize) -> Self {
        GraphBuilder { n, edges: Vec::new(), root, boundary: vec![false; n], labels: None }
    }

    pub(crate) fn add_edge(&mut self, u: usize, v: usize, tag: EdgeTag) {
        self.edges.push((u, v, tag));
    }

    pub(crate) fn mark_boundary(&mut self, v: usize) {
        self.boundary[v] = true;
    }

    /// Validate and renumber vertices breadth-first from the root.
    pub(crate) fn build(self, family: FamilySpec) -> Result<FiniteGraph> {
        self.finish(family, true)
    }

    fn finish(self, family: FamilySpec, relabel: bool) -> Result<FiniteGraph> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if self.root >= n {
            return Err(Error::InvalidVertex { vertex: self.root, n_vertices: n });
        }
        let mut adj: Vec<Vec<(u32, EdgeTag)>> = vec![Vec::new(); n];
        for &(u, v, t) in &self.edges {
            if u >= n || v >= n {
                return Err(Error::InvalidVertex { vertex: u.max(v), n_vertices: n });
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adj[u].push((v as u32, t));
            adj[v].push((u as u32, t));
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidGraph(format!("duplicate edge at vertex {u}")));
            }
        }

        let order: Vec<usize> = if relabel {
            let mut seen = vec![false; n];
            let mut order = Vec::with_capacity(n);
            seen[self.root] = true;
            order.push(self.root);
            let mut head = 0;
            while head < order.len() {
                let u = order[head];
                head += 1;
                for &(w, _) in &adj[u] {
                    let w = w as usize;
                    if !seen[w] {
                        seen[w] = true;
                        order.push(w);
                    }
                }
            }
            order
        } else {
            (0..n).collect()
        };
        let mut new_id = vec![u32::MAX; n];
        for (i, &old) in order.iter().enumerate() {
            new_id[old] = i as u32;
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * self.edges.len());
        let mut tags = Vec::with_capacity(2 * self.edges.len());
        offsets.push(0);
        for &old in &order {
            let mut row: Vec<(u32, EdgeTag)> =
                adj[old].iter().map(|&(w, t)| (new_id[w as usize], t)).collect();
            row.sort_unstable();
            for (w, t) in row {
                targets.push(w);
                tags.push(t);
            }
            offsets.push(targets.len());
        }
        let mut is_boundary = vec![false; n];
        for (old, &b) in self.boundary.iter().enumerate() {
            if b && new_id[old] != u32::MAX {
                is_boundary[new_id[old] as usize] = true;
            }
        }
        let boundary: Vec<usize> = (0..n).filter(|&v| is_boundary[v]).collect();
        let labels = self.labels.map(|l| Labels {
            values: order.iter().map(|&old| l.values[old].clone()).collect(),
            schema: l.schema,
        });

        let g = FiniteGraph {
            offsets,
            targets,
            tags,
            root: new_id[self.root] as usize,
            boundary,
            is_boundary,
            labels,
            family,
        };
        if order.len() < n || g.distances_from(g.root).contains(&u32::MAX) {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        Ok(g)
    }
}
