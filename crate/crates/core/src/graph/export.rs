//! Byte-stable JSON export of a [`FiniteGraph`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EdgeTag, FamilySpec, FiniteGraph, Labels};
use crate::error::{Error, Result};

/// On-disk shape of an exported graph. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub family: String,
    pub params: serde_json::Value,
    pub n_vertices: usize,
    pub root: usize,
    pub boundary: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edge_tags: BTreeMap<EdgeTag, Vec<[usize; 2]>>,
    pub labels: Option<Labels>,
}

impl GraphExport {
    pub fn from_graph(g: &FiniteGraph) -> Self {
        let mut edges = Vec::with_capacity(g.n_edges());
        let mut edge_tags: BTreeMap<EdgeTag, Vec<[usize; 2]>> = BTreeMap::new();
        for (u, v, t) in g.edges() {
            edges.push([u, v]);
            if t != EdgeTag::Plain {
                edge_tags.entry(t).or_default().push([u, v]);
            }
        }
        GraphExport {
            family: g.family().name().to_string(),
            params: serde_json::to_value(g.family()).expect("family specs serialize"),
            n_vertices: g.n_vertices(),
            root: g.root(),
            boundary: g.boundary().to_vec(),
            edges,
            edge_tags,
            labels: g.labels().cloned(),
        }
    }

    pub fn to_graph(&self) -> Result<FiniteGraph> {
        let family: FamilySpec = serde_json::from_value(self.params.clone())
            .unwrap_or_else(|_| FamilySpec::Custom { name: self.family.clone() });
        let mut tag_of: BTreeMap<(usize, usize), EdgeTag> = BTreeMap::new();
        for (&t, list) in &self.edge_tags {
            for &[u, v] in list {
                tag_of.insert((u.min(v), u.max(v)), t);
            }
        }
        let edges: Vec<(usize, usize, EdgeTag)> = self
            .edges
            .iter()
            .map(|&[u, v]| (u, v, tag_of.get(&(u.min(v), u.max(v))).copied().unwrap_or(EdgeTag::Plain)))
            .collect();
        if let Some(l) = &self.labels {
            if l.values.len() != self.n_vertices {
                return Err(Error::Format("label rows do not match vertex count".into()));
            }
        }
        FiniteGraph::from_edges(self.n_vertices, &edges, self.root, &self.boundary, self.labels.clone(), family)
    }

    /// Serialized text (single line plus trailing newline).
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string(self).expect("graph export serializes");
        s.push('\n');
        s
    }
}

pub fn write_graph(g: &FiniteGraph, path: &Path) -> Result<()> {
    fs::write(path, GraphExport::from_graph(g).to_text())?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<FiniteGraph> {
    let text = fs::read_to_string(path)?;
    let export: GraphExport = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    export.to_graph()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{cartesian_product, grid_box, tree_ball};

    #[test]
    fn k2_has_one_edge_record() {
        let g = grid_box(&[2], false).unwrap();
        let e = GraphExport::from_graph(&g);
        assert_eq!(e.edges, vec![[0, 1]]);
        assert!(e.to_text().contains("\"edges\":[[0,1]]"));
    }

    #[test]
    fn tree_ball_boundary_sorted() {
        let e = GraphExport::from_graph(&tree_ball(3, 2).unwrap());
        assert_eq!(e.boundary, vec![4, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn round_trip_preserves_ids_and_tags() {
        let g = cartesian_product(&tree_ball(3, 1).unwrap(), &grid_box(&[3], false).unwrap()).unwrap();
        let back = GraphExport::from_graph(&g).to_graph().unwrap();
        assert_eq!(back, g);
        assert_eq!(GraphExport::from_graph(&back).to_text(), GraphExport::from_graph(&g).to_text());
    }
}
