use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, RngExt};

use super::{is_compatible, Partition, SpanningTree, SpatialGraph};
use crate::error::{Error, Result};

/// Heap key: weight first, canonical edge index breaks ties.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    weight: f64,
    edge: usize,
    to: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.edge.cmp(&other.edge))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum spanning tree by Prim's algorithm, grown from area 0. Equal
/// weights are resolved by the lower canonical edge index.
pub fn prim_mst(graph: &SpatialGraph, weights: &[f64]) -> Result<SpanningTree> {
    if weights.len() != graph.n_edges() {
        return Err(Error::Dimension {
            what: "edge weights",
            expected: graph.n_edges(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("edge weights"));
    }
    let n = graph.n_areas();
    let mut in_tree = vec![false; n];
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let mut heap = BinaryHeap::new();

    let visit = |v: usize, in_tree: &mut Vec<bool>, heap: &mut BinaryHeap<Reverse<Candidate>>| {
        in_tree[v] = true;
        for &(w, e) in graph.neighbors(v) {
            if !in_tree[w] {
                heap.push(Reverse(Candidate {
                    weight: weights[e],
                    edge: e,
                    to: w,
                }));
            }
        }
    };
    visit(0, &mut in_tree, &mut heap);
    while let Some(Reverse(c)) = heap.pop() {
        if in_tree[c.to] {
            continue;
        }
        chosen.push(c.edge);
        visit(c.to, &mut in_tree, &mut heap);
    }
    if let Some(area) = in_tree.iter().position(|t| !t) {
        return Err(Error::DisconnectedGraph { area });
    }
    chosen.sort_unstable();
    Ok(SpanningTree::from_sorted_unchecked(graph, chosen))
}

/// Spanning tree from iid `U(0, 1)` edge weights. This is the standard cheap
/// stand-in for a uniform draw over spanning trees; it is not exactly uniform.
pub fn random_spanning_tree<R: Rng + ?Sized>(graph: &SpatialGraph, rng: &mut R) -> SpanningTree {
    let weights: Vec<f64> = (0..graph.n_edges()).map(|_| rng.random::<f64>()).collect();
    prim_mst(graph, &weights).expect("graph invariants guarantee a spanning tree")
}

/// Uniform weight ranges for within-cluster and cross-cluster edges. Every
/// within-cluster weight must lie below every cross-cluster weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightRanges {
    pub within: (f64, f64),
    pub across: (f64, f64),
}

impl Default for WeightRanges {
    fn default() -> Self {
        WeightRanges {
            within: (0.0, 1.0),
            across: (10.0, 20.0),
        }
    }
}

impl WeightRanges {
    fn validate(&self) -> Result<()> {
        let (wl, wh) = self.within;
        let (al, ah) = self.across;
        if !(wl < wh && al < ah && wh <= al) {
            return Err(Error::param(
                "weight ranges",
                format!("need within.lo < within.hi <= across.lo < across.hi, got {self:?}"),
            ));
        }
        Ok(())
    }
}

/// Default-range version of [`assign_compatibility_weights_with`].
pub fn assign_compatibility_weights<R: Rng + ?Sized>(
    graph: &SpatialGraph,
    partition: &Partition,
    rng: &mut R,
) -> Vec<f64> {
    assign_compatibility_weights_with(graph, partition, WeightRanges::default(), rng)
        .expect("default ranges are valid")
}

/// Random edge weights under which every MST keeps clusters internally
/// connected and joins them with exactly `k - 1` cross-cluster edges.
pub fn assign_compatibility_weights_with<R: Rng + ?Sized>(
    graph: &SpatialGraph,
    partition: &Partition,
    ranges: WeightRanges,
    rng: &mut R,
) -> Result<Vec<f64>> {
    ranges.validate()?;
    if partition.n_areas() != graph.n_areas() {
        return Err(Error::Dimension {
            what: "partition labels",
            expected: graph.n_areas(),
            got: partition.n_areas(),
        });
    }
    Ok(graph
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (lo, hi) = if partition.label(a) == partition.label(b) {
                ranges.within
            } else {
                ranges.across
            };
            lo + (hi - lo) * rng.random::<f64>()
        })
        .collect())
}

/// Draws a spanning tree compatible with `partition`. Fails with
/// [`Error::DisconnectedCluster`] when some cluster is not connected in the
/// graph, since no compatible tree exists then.
pub fn sample_compatible_tree<R: Rng + ?Sized>(
    graph: &SpatialGraph,
    partition: &Partition,
    rng: &mut R,
) -> Result<SpanningTree> {
    let weights = assign_compatibility_weights_with(graph, partition, WeightRanges::default(), rng)?;
    let tree = prim_mst(graph, &weights)?;
    if is_compatible(&tree, partition) {
        return Ok(tree);
    }
    for (cluster, members) in partition.clusters().iter().enumerate() {
        if graph.component_count(members) > 1 {
            let area = first_cut_off(graph, members);
            return Err(Error::DisconnectedCluster { cluster, area });
        }
    }
    Err(Error::Incompatible)
}

fn first_cut_off(graph: &SpatialGraph, members: &[usize]) -> usize {
    let mut inside = vec![false; graph.n_areas()];
    for &m in members {
        inside[m] = true;
    }
    let mut seen = vec![false; graph.n_areas()];
    let mut stack = vec![members[0]];
    seen[members[0]] = true;
    while let Some(v) = stack.pop() {
        for &(w, _) in graph.neighbors(v) {
            if inside[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    *members.iter().find(|&&m| !seen[m]).expect("cluster is disconnected")
}
