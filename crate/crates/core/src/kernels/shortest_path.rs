use std::collections::{BTreeMap, VecDeque};

use super::sparse::{from_counts, sparse_dot, SparseVec};
use super::LabeledGraph;

/// `(smaller label, larger label, path length)` of an unordered node pair.
pub type SpFeature = (u64, u64, u32);

/// Counts every unordered pair of distinct nodes at BFS distance
/// `1..=max_length` under its labeled-path feature.
pub fn shortest_path_features(g: &LabeledGraph, max_length: usize) -> SparseVec<SpFeature> {
    let n = g.node_count();
    let mut counts: BTreeMap<SpFeature, f64> = BTreeMap::new();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            if dist[u] == max_length {
                continue;
            }
            for &v in &g.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                    if v > s {
                        let (a, b) = (g.labels[s], g.labels[v]);
                        let key = (a.min(b), a.max(b), dist[v] as u32);
                        *counts.entry(key).or_insert(0.0) += 1.0;
                    }
                }
            }
        }
    }
    from_counts(counts)
}

/// Dot product of the two graphs' shortest-path feature maps.
pub fn shortest_path_kernel(a: &LabeledGraph, b: &LabeledGraph, max_length: usize) -> f64 {
    sparse_dot(
        &shortest_path_features(a, max_length),
        &shortest_path_features(b, max_length),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: u64 = 0;
    const B: u64 = 1;
    const C: u64 = 2;

    #[test]
    fn path_abc_vs_ab_shares_one_feature() {
        let abc = LabeledGraph::new(vec![A, B, C], &[(0, 1), (1, 2)]);
        let ab = LabeledGraph::new(vec![A, B], &[(0, 1)]);
        assert_eq!(
            shortest_path_features(&abc, 10),
            vec![((A, B, 1), 1.0), ((A, C, 2), 1.0), ((B, C, 1), 1.0)]
        );
        assert_eq!(shortest_path_kernel(&abc, &ab, 10), 1.0);
    }

    #[test]
    fn disjoint_labels_give_zero() {
        let g1 = LabeledGraph::new(vec![1, 2, 3], &[(0, 1), (1, 2)]);
        let g2 = LabeledGraph::new(vec![4, 5], &[(0, 1)]);
        assert_eq!(shortest_path_kernel(&g1, &g2, 10), 0.0);
    }

    #[test]
    fn self_similarity_positive() {
        let g = LabeledGraph::new(vec![7, 7], &[(0, 1)]);
        assert!(shortest_path_kernel(&g, &g, 10) > 0.0);
    }

    #[test]
    fn length_cap_truncates() {
        let labels: Vec<u64> = (0..15).collect();
        let edges: Vec<_> = (0..14).map(|i| (i, i + 1)).collect();
        let g = LabeledGraph::new(labels, &edges);
        let f = shortest_path_features(&g, 3);
        let total: f64 = f.iter().map(|(_, c)| c).sum();
        // pairs at distance 1, 2, 3 on a 15-node path: 14 + 13 + 12
        assert_eq!(total, 39.0);
        assert!(f.iter().all(|((_, _, d), _)| *d <= 3));
    }

    #[test]
    fn counts_repeated_labels() {
        // triangle with all-equal labels: three pairs at distance 1
        let g = LabeledGraph::new(vec![9, 9, 9], &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(shortest_path_features(&g, 10), vec![((9, 9, 1), 3.0)]);
        assert_eq!(shortest_path_kernel(&g, &g, 10), 9.0);
    }
}
