//! Canonical forms of rooted graphs by individualization-refinement.
//!
//! The search tree is the usual one: refine the root-distance coloring to an
//! equitable partition, branch on every vertex of the first non-singleton
//! cell, and keep the lexicographically smallest relabeled edge list among
//! the discrete leaves. Leaves that reproduce the current best certificate
//! yield automorphisms, which prune siblings lying in a common orbit of the
//! automorphisms fixing the branch prefix.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;

/// Default cap on neighborhood size for canonicalization.
pub const DEFAULT_SIZE_CAP: usize = 512;

/// Byte string identifying a rooted-isomorphism class.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature(pub Vec<u8>);

impl Signature {
    /// Hex SHA-256 of the signature bytes.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(&self.0);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Number of vertices encoded in the signature.
    pub fn n_vertices(&self) -> usize {
        u32::from_le_bytes(self.0[..4].try_into().unwrap()) as usize
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", &self.hash_hex()[..12])
    }
}

/// Canonical signature of `g` viewed as a graph rooted at `g.root()`.
pub fn canonical_signature_of(g: &FiniteGraph, cap: usize) -> Result<Signature> {
    let n = g.n_vertices();
    if n > cap {
        return Err(Error::SizeCapExceeded { size: n, cap });
    }
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).iter().map(|&w| w as usize).collect()).collect();
    let dist = g.distances_from(g.root());
    let colors: Vec<u32> = dist;
    let mut search = Search { adj: &adj, best: None, best_perm: Vec::new(), automorphisms: Vec::new() };
    search.descend(colors, &mut Vec::new());
    let edges = search.best.unwrap_or_default();
    let mut bytes = Vec::with_capacity(8 + 8 * edges.len());
    bytes.extend_from_slice(&(n as u32).to_le_bytes());
    bytes.extend_from_slice(&(edges.len() as u32).to_le_bytes());
    for (u, v) in edges {
        bytes.extend_from_slice(&u.to_le_bytes());
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    Ok(Signature(bytes))
}

struct Search<'a> {
    adj: &'a [Vec<usize>],
    best: Option<Vec<(u32, u32)>>,
    best_perm: Vec<u32>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn descend(&mut self, mut colors: Vec<u32>, prefix: &mut Vec<usize>) {
        refine(self.adj, &mut colors);
        let n = colors.len();
        let cells = count_cells(&colors);
        if cells == n {
            self.leaf(&colors);
            return;
        }
        // first non-singleton cell in color order
        let mut size = vec![0usize; cells];
        for &c in &colors {
            size[c as usize] += 1;
        }
        let target = size.iter().position(|&s| s > 1).unwrap() as u32;
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &members {
            if !explored.is_empty() && self.same_orbit(prefix, v, &explored) {
                continue;
            }
            explored.push(v);
            let child = individualize(&colors, v);
            prefix.push(v);
            self.descend(child, prefix);
            prefix.pop();
        }
    }

    fn leaf(&mut self, colors: &[u32]) {
        let mut cert: Vec<(u32, u32)> = Vec::new();
        for (u, nb) in self.adj.iter().enumerate() {
            for &w in nb {
                let (a, b) = (colors[u], colors[w]);
                if a < b {
                    cert.push((a, b));
                }
            }
        }
        cert.sort_unstable();
        match &self.best {
            Some(best) if *best < cert => {}
            Some(best) if *best == cert => {
                // gamma maps v to the vertex holding v's canonical label in the best leaf
                let mut inverse = vec![0usize; colors.len()];
                for (v, &c) in self.best_perm.iter().enumerate() {
                    inverse[c as usize] = v;
                }
                let gamma: Vec<usize> = colors.iter().map(|&c| inverse[c as usize]).collect();
                if gamma.iter().enumerate().any(|(v, &g)| v != g) {
                    self.automorphisms.push(gamma);
                }
            }
            _ => {
                self.best = Some(cert);
                self.best_perm = colors.to_vec();
            }
        }
    }

    /// Whether `v` shares an orbit with an explored sibling under the
    /// automorphisms found so far that fix `prefix` pointwise.
    fn same_orbit(&self, prefix: &[usize], v: usize, explored: &[usize]) -> bool {
        let n = self.adj.len();
        let gens: Vec<&Vec<usize>> = self
            .automorphisms
            .iter()
            .filter(|g| prefix.iter().all(|&p| g[p] == p))
            .collect();
        if gens.is_empty() {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for g in gens {
            for (x, &y) in g.iter().enumerate() {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&e| find(&mut parent, e) == rv)
    }
}

fn count_cells(colors: &[u32]) -> usize {
    colors.iter().max().map_or(0, |&m| m as usize + 1)
}

/// Split `v` off its cell, placing it first.
fn individualize(colors: &[u32], v: usize) -> Vec<u32> {
    let keyed: Vec<u64> =
        colors.iter().enumerate().map(|(u, &c)| 2 * c as u64 + u64::from(u != v)).collect();
    compress(&keyed)
}

/// Rank-compress keys into colors `0..k` preserving order.
fn compress<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).unwrap() as u32).collect()
}

/// Refine to the coarsest equitable partition finer than `colors`. New colors
/// are ranks of `(old color, sorted neighbor colors)`, which keeps the
/// procedure independent of vertex numbering.
fn refine(adj: &[Vec<usize>], colors: &mut Vec<u32>) {
    let mut cells = count_cells(colors);
    loop {
        let keys: Vec<(u32, Vec<u32>)> = (0..colors.len())
            .map(|v| {
                let mut nb: Vec<u32> = adj[v].iter().map(|&w| colors[w]).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let next = compress(&keys);
        let next_cells = count_cells(&next);
        *colors = next;
        if next_cells == cells {
            break;
        }
        cells = next_cells;
    }
}
