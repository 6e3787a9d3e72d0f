use std::collections::{BTreeMap, HashMap};

use super::sparse::{from_counts, sparse_dot, SparseVec};
use super::LabeledGraph;

/// Weisfeiler-Lehman relabeling over a set of graphs.
///
/// Returns `labels[g][h][v]`: the label of node `v` of graph `g` after `h`
/// refinement rounds, for `h` in `0..=iterations`. Round 0 is the raw node
/// label. Round `h` compresses `(label_{h-1}(v), sorted multiset of
/// label_{h-1}(neighbours))` through one dictionary shared by all graphs,
/// with ids handed out in scan order, so equal signatures get equal labels
/// across graphs.
pub fn wl_refine(graphs: &[LabeledGraph], iterations: usize) -> Vec<Vec<Vec<u64>>> {
    let mut out: Vec<Vec<Vec<u64>>> = graphs.iter().map(|g| vec![g.labels.clone()]).collect();
    for h in 1..=iterations {
        let mut dict: HashMap<(u64, Vec<u64>), u64> = HashMap::new();
        for (gi, g) in graphs.iter().enumerate() {
            let prev = &out[gi][h - 1];
            let next: Vec<u64> = (0..g.node_count())
                .map(|v| {
                    let mut nbrs: Vec<u64> = g.adjacency[v].iter().map(|&u| prev[u]).collect();
                    nbrs.sort_unstable();
                    let fresh = dict.len() as u64;
                    *dict.entry((prev[v], nbrs)).or_insert(fresh)
                })
                .collect();
            out[gi].push(next);
        }
    }
    out
}

/// Label-count histogram accumulated over all rounds, keyed by
/// `(round, label)`.
pub fn wl_features(rounds: &[Vec<u64>]) -> SparseVec<(u32, u64)> {
    let mut counts = BTreeMap::new();
    for (h, labels) in rounds.iter().enumerate() {
        for &l in labels {
            *counts.entry((h as u32, l)).or_insert(0.0) += 1.0;
        }
    }
    from_counts(counts)
}

pub fn wl_kernel(a: &LabeledGraph, b: &LabeledGraph, iterations: usize) -> f64 {
    let labels = wl_refine(&[a.clone(), b.clone()], iterations);
    sparse_dot(&wl_features(&labels[0]), &wl_features(&labels[1]))
}
