//! Spatial neighbourhood graphs, spanning trees and tree-induced partitions.
//!
//! Edges are stored in a canonical order: lexicographic by `(min, max)` area
//! id. Tree edges, edge-indicator bits and serialized partitions all follow
//! that order, which keeps chains reproducible across platforms.

mod io;
mod mst;
mod partition;

pub use io::{read_adjacency_csv, read_partition_csv, write_adjacency_csv, write_partition_csv};
pub use mst::{
    assign_compatibility_weights, assign_compatibility_weights_with, prim_mst,
    random_spanning_tree, sample_compatible_tree, WeightRanges,
};
pub use partition::{
    indicators_for, is_compatible, partition_from_indicators, EdgeIndicators, Partition,
};

use crate::error::{Error, Result};

/// Undirected, connected graph of neighbouring areas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpatialGraph {
    n_areas: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl SpatialGraph {
    /// Builds a graph from unordered area pairs. Duplicate pairs (in either
    /// orientation) are merged; self-loops and out-of-range ids are rejected,
    /// as is a disconnected result.
    pub fn new<I>(n_areas: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n_areas == 0 {
            return Err(Error::param("n_areas", "graph needs at least one area"));
        }
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidEdge {
                    a,
                    b,
                    reason: "self-loop",
                });
            }
            if a >= n_areas || b >= n_areas {
                return Err(Error::InvalidEdge {
                    a,
                    b,
                    reason: "area id out of range",
                });
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        canon.dedup();

        let mut adjacency = vec![Vec::new(); n_areas];
        for (idx, &(a, b)) in canon.iter().enumerate() {
            adjacency[a].push((b, idx));
            adjacency[b].push((a, idx));
        }
        let graph = SpatialGraph {
            n_areas,
            edges: canon,
            adjacency,
        };
        if let Some(area) = graph.first_unreachable() {
            return Err(Error::DisconnectedGraph { area });
        }
        Ok(graph)
    }

    /// Rook-adjacency lattice with `rows * cols` areas, numbered row-major.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                if c + 1 < cols {
                    edges.push((i, i + 1));
                }
                if r + 1 < rows {
                    edges.push((i, i + cols));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn n_areas(&self) -> usize {
        self.n_areas
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonically ordered edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> (usize, usize) {
        self.edges[idx]
    }

    /// `(neighbour, edge index)` pairs of `area`.
    pub fn neighbors(&self, area: usize) -> &[(usize, usize)] {
        &self.adjacency[area]
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// Number of connected components of the subgraph induced by `members`.
    pub fn component_count(&self, members: &[usize]) -> usize {
        if members.is_empty() {
            return 0;
        }
        let mut inside = vec![false; self.n_areas];
        for &m in members {
            inside[m] = true;
        }
        let mut seen = vec![false; self.n_areas];
        let mut stack = Vec::new();
        let mut components = 0;
        for &start in members {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if inside[w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    /// True when every cluster of `partition` induces a connected subgraph.
    pub fn is_contiguous(&self, partition: &Partition) -> bool {
        partition
            .clusters()
            .iter()
            .all(|members| self.component_count(members) == 1)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.n_areas];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// A spanning tree of a [`SpatialGraph`], stored as `n_areas - 1` canonical
/// edge indices in increasing order. Position `l` in that list is the tree
/// edge that indicator bit `l` refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    n_areas: usize,
    edges: Vec<usize>,
    ends: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl SpanningTree {
    /// Validates that `edges` (graph edge indices, any order) form a spanning
    /// tree of `graph`.
    pub fn from_edges(graph: &SpatialGraph, mut edges: Vec<usize>) -> Result<Self> {
        let n = graph.n_areas();
        edges.sort_unstable();
        edges.dedup();
        if edges.len() + 1 != n {
            return Err(Error::Dimension {
                what: "spanning tree edges",
                expected: n - 1,
                got: edges.len(),
            });
        }
        let mut dsu = DisjointSets::new(n);
        for &e in &edges {
            if e >= graph.n_edges() {
                return Err(Error::param("edges", format!("edge index {e} out of range")));
            }
            let (a, b) = graph.edge(e);
            if !dsu.union(a, b) {
                return Err(Error::InvalidEdge {
                    a,
                    b,
                    reason: "closes a cycle in the tree",
                });
            }
        }
        Ok(Self::from_sorted_unchecked(graph, edges))
    }

    pub(crate) fn from_sorted_unchecked(graph: &SpatialGraph, edges: Vec<usize>) -> Self {
        let n = graph.n_areas();
        let ends: Vec<_> = edges.iter().map(|&e| graph.edge(e)).collect();
        let mut adjacency = vec![Vec::new(); n];
        for (pos, &(a, b)) in ends.iter().enumerate() {
            adjacency[a].push((b, pos));
            adjacency[b].push((a, pos));
        }
        SpanningTree {
            n_areas: n,
            edges,
            ends,
            adjacency,
        }
    }

    pub fn n_areas(&self) -> usize {
        self.n_areas
    }

    /// Canonical graph edge indices of the tree, increasing.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Endpoints of tree edge at position `pos`.
    pub fn endpoints(&self, pos: usize) -> (usize, usize) {
        self.ends[pos]
    }

    pub fn n_tree_edges(&self) -> usize {
        self.ends.len()
    }

    /// `(neighbour, tree position)` pairs of `area` within the tree.
    pub fn neighbors(&self, area: usize) -> &[(usize, usize)] {
        &self.adjacency[area]
    }
}

/// Union-find with path halving.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // keep the smaller root as representative
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_and_dedup() {
        let g = SpatialGraph::new(4, [(2, 1), (0, 1), (1, 2), (3, 0), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 3), (1, 2)]);
        assert_eq!(g.edge_index(2, 1), Some(2));
        assert_eq!(g.edge_index(2, 3), None);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SpatialGraph::new(3, [(0, 0), (1, 2)]),
            Err(Error::InvalidEdge { .. })
        ));
        assert!(matches!(
            SpatialGraph::new(3, [(0, 3)]),
            Err(Error::InvalidEdge { .. })
        ));
        assert!(matches!(
            SpatialGraph::new(4, [(0, 1), (2, 3)]),
            Err(Error::DisconnectedGraph { area: 2 })
        ));
    }

    #[test]
    fn grid_shape() {
        let g = SpatialGraph::grid(3, 4).unwrap();
        assert_eq!(g.n_areas(), 12);
        assert_eq!(g.n_edges(), 3 * 3 + 2 * 4);
    }

    #[test]
    fn induced_components() {
        let g = SpatialGraph::path(5).unwrap();
        assert_eq!(g.component_count(&[0, 1, 2]), 1);
        assert_eq!(g.component_count(&[0, 2, 4]), 3);
        assert_eq!(g.component_count(&[0, 1, 3, 4]), 2);
    }

    #[test]
    fn tree_validation() {
        let g = SpatialGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(SpanningTree::from_edges(&g, vec![0, 2]).is_ok());
        assert!(SpanningTree::from_edges(&g, vec![0]).is_err());
        let g4 = SpatialGraph::new(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        // (0,1),(0,2),(1,2) is a cycle
        assert!(SpanningTree::from_edges(&g4, vec![0, 1, 2]).is_err());
    }
}
