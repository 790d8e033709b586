use serde::{Deserialize, Serialize};

use super::{DisjointSets, SpanningTree};

/// A partition of areas into clusters.
///
/// Labels are canonical: clusters are numbered in order of their smallest
/// member, so two partitions are equal exactly when they group areas the
/// same way.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    labels: Vec<usize>,
    #[serde(skip)]
    members: Vec<Vec<usize>>,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut remap: Vec<Option<usize>> = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (area, &r) in raw.iter().enumerate() {
            if r >= remap.len() {
                remap.resize(r + 1, None);
            }
            let id = *remap[r].get_or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            labels.push(id);
            members[id].push(area);
        }
        Partition { labels, members }
    }

    pub fn single(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn n_areas(&self) -> usize {
        self.labels.len()
    }

    /// Number of clusters.
    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, area: usize) -> usize {
        self.labels[area]
    }

    /// Member lists, one per cluster, each sorted.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn cluster(&self, id: usize) -> &[usize] {
        &self.members[id]
    }
}

impl From<Vec<usize>> for Partition {
    fn from(raw: Vec<usize>) -> Self {
        Partition::from_labels(&raw)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.labels
    }
}

/// One bit per tree edge, aligned with [`SpanningTree::edges`]; `true` keeps
/// the edge, `false` removes it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeIndicators {
    bits: Vec<bool>,
}

impl EdgeIndicators {
    pub fn new(bits: Vec<bool>) -> Self {
        EdgeIndicators { bits }
    }

    pub fn all_kept(len: usize) -> Self {
        EdgeIndicators {
            bits: vec![true; len],
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, l: usize) -> bool {
        self.bits[l]
    }

    pub fn set(&mut self, l: usize, keep: bool) {
        self.bits[l] = keep;
    }

    pub fn removed(&self) -> usize {
        self.bits.iter().filter(|b| !**b).count()
    }

    /// Bit pattern packed into an integer, bit `l` = edge `l` (for up to 64
    /// edges; used for enumerating small state spaces).
    pub fn as_mask(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .fold(0u64, |m, (l, _)| m | (1 << l))
    }
}

/// Prunes zero-bit edges and returns the connected components as clusters.
pub fn partition_from_indicators(tree: &SpanningTree, bits: &EdgeIndicators) -> Partition {
    assert_eq!(
        bits.len(),
        tree.n_tree_edges(),
        "indicator vector length must equal the number of tree edges"
    );
    let mut dsu = DisjointSets::new(tree.n_areas());
    for (l, &keep) in bits.bits().iter().enumerate() {
        if keep {
            let (a, b) = tree.endpoints(l);
            dsu.union(a, b);
        }
    }
    let roots: Vec<usize> = (0..tree.n_areas()).map(|i| dsu.find(i)).collect();
    Partition::from_labels(&roots)
}

/// Bits that keep a tree edge exactly when its endpoints share a cluster.
pub fn indicators_for(tree: &SpanningTree, partition: &Partition) -> EdgeIndicators {
    let bits = (0..tree.n_tree_edges())
        .map(|l| {
            let (a, b) = tree.endpoints(l);
            partition.label(a) == partition.label(b)
        })
        .collect();
    EdgeIndicators::new(bits)
}

/// True when pruning every cross-cluster tree edge reproduces `partition`.
///
/// Pruning the `m` cross-cluster edges leaves `m + 1` components, each inside
/// a single cluster, so the partition is recovered iff `m + 1 == k`.
pub fn is_compatible(tree: &SpanningTree, partition: &Partition) -> bool {
    if tree.n_areas() != partition.n_areas() {
        return false;
    }
    let cut = (0..tree.n_tree_edges())
        .filter(|&l| {
            let (a, b) = tree.endpoints(l);
            partition.label(a) != partition.label(b)
        })
        .count();
    cut + 1 == partition.k()
}
