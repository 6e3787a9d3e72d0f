use std::sync::OnceLock;

use rand::seq::index;

use super::{KernelConfig, LabeledGraph};
use crate::seed;

/// Isomorphism classes of unlabeled graphs on `s` nodes, as a lookup from
/// edge bitmask to dense class id. Bit `b` of a mask is the `b`-th pair
/// `(i, j)`, `i < j`, in lexicographic order.
struct ClassTable {
    class_of: Vec<u8>,
    classes: usize,
}

fn pair_bit(s: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    // pairs before row i, then offset within row
    i * (2 * s - i - 1) / 2 + (j - i - 1)
}

fn permutations(s: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; s], &mut out);
    out
}

fn build_table(s: usize) -> ClassTable {
    let pairs = s * (s - 1) / 2;
    let perms = permutations(s);
    let canonical: Vec<u32> = (0..1u32 << pairs)
        .map(|mask| {
            perms
                .iter()
                .map(|p| {
                    let mut m = 0u32;
                    for i in 0..s {
                        for j in i + 1..s {
                            if mask >> pair_bit(s, i, j) & 1 == 1 {
                                m |= 1 << pair_bit(s, p[i], p[j]);
                            }
                        }
                    }
                    m
                })
                .min()
                .expect("at least one permutation")
        })
        .collect();
    let mut reps = canonical.clone();
    reps.sort_unstable();
    reps.dedup();
    let class_of = canonical
        .iter()
        .map(|c| reps.binary_search(c).expect("representative present") as u8)
        .collect();
    ClassTable {
        class_of,
        classes: reps.len(),
    }
}

fn table(s: usize) -> &'static ClassTable {
    static TABLES: [OnceLock<ClassTable>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    assert!((3..=5).contains(&s), "graphlet size {s} outside 3..=5");
    TABLES[s - 3].get_or_init(|| build_table(s))
}

/// Number of isomorphism classes of graphs on `s` nodes (4, 11, 34).
pub fn graphlet_class_count(s: usize) -> usize {
    table(s).classes
}

/// Normalized histogram of graphlet classes over `samples` uniformly drawn
/// `size`-subsets of nodes, or `None` when the graph has fewer than `size`
/// nodes. The sampling stream depends only on `seed`, so identical graphs
/// get identical histograms.
pub fn graphlet_histogram(g: &LabeledGraph, size: usize, samples: usize, seed: u64) -> Option<Vec<f64>> {
    let n = g.node_count();
    if n < size || samples == 0 {
        return None;
    }
    let t = table(size);
    let mut rng = seed::rng_from(seed, &[seed::tag("graphlet")]);
    let mut counts = vec![0usize; t.classes];
    for _ in 0..samples {
        let nodes = index::sample(&mut rng, n, size).into_vec();
        let mut mask = 0usize;
        for i in 0..size {
            for j in i + 1..size {
                if g.has_edge(nodes[i], nodes[j]) {
                    mask |= 1 << pair_bit(size, i, j);
                }
            }
        }
        counts[t.class_of[mask] as usize] += 1;
    }
    Some(counts.into_iter().map(|c| c as f64 / samples as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphletSimilarity {
    pub value: f64,
    /// Set when either graph has fewer nodes than the graphlet size; the
    /// value is then 0.
    pub undersized: bool,
}

pub fn graphlet_kernel(a: &LabeledGraph, b: &LabeledGraph, cfg: &KernelConfig, seed: u64) -> GraphletSimilarity {
    let ha = graphlet_histogram(a, cfg.graphlet_size, cfg.graphlet_samples, seed);
    let hb = graphlet_histogram(b, cfg.graphlet_size, cfg.graphlet_samples, seed);
    match (ha, hb) {
        (Some(x), Some(y)) => GraphletSimilarity {
            value: x.iter().zip(&y).map(|(p, q)| p * q).sum(),
            undersized: false,
        },
        _ => GraphletSimilarity {
            value: 0.0,
            undersized: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> LabeledGraph {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        LabeledGraph::new(vec![0; n], &edges)
    }

    #[test]
    fn class_counts_match_known_enumeration() {
        assert_eq!(graphlet_class_count(3), 4);
        assert_eq!(graphlet_class_count(4), 11);
        assert_eq!(graphlet_class_count(5), 34);
    }

    #[test]
    fn k5_triangles_only() {
        let cfg = KernelConfig {
            graphlet_size: 3,
            ..Default::default()
        };
        let k5 = complete(5);
        let h = graphlet_histogram(&k5, 3, 200, 1).unwrap();
        assert_eq!(h.iter().filter(|&&p| p > 0.0).count(), 1);
        assert_eq!(h[h.len() - 1], 1.0, "triangle has the largest mask");
        let s = graphlet_kernel(&k5, &k5, &cfg, 1);
        assert_eq!(s.value, 1.0);
        assert!(!s.undersized);
    }

    #[test]
    fn undersized_graph_flags_zero() {
        let cfg = KernelConfig::default();
        let tiny = LabeledGraph::new(vec![1, 2], &[(0, 1)]);
        let s = graphlet_kernel(&tiny, &complete(6), &cfg, 0);
        assert_eq!(s, GraphletSimilarity { value: 0.0, undersized: true });
        let empty = LabeledGraph::new(vec![], &[]);
        assert!(graphlet_kernel(&empty, &complete(6), &cfg, 0).undersized);
    }

    #[test]
    fn histogram_sums_to_one_and_is_seeded() {
        let edges: Vec<_> = (0..19).map(|i| (i, i + 1)).chain([(0, 5), (3, 9)]).collect();
        let g = LabeledGraph::new(vec![0; 20], &edges);
        for s in 3..=5 {
            let h = graphlet_histogram(&g, s, 300, 4).unwrap();
            assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(h, graphlet_histogram(&g, s, 300, 4).unwrap());
        }
    }

    #[test]
    fn identical_graphs_same_seed_normalize_to_one() {
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1)).chain([(2, 7)]).collect();
        let g = LabeledGraph::new(vec![0; 10], &edges);
        let cfg = KernelConfig::default();
        let kab = graphlet_kernel(&g, &g.clone(), &cfg, 3).value;
        let kaa = graphlet_kernel(&g, &g, &cfg, 3).value;
        assert!((kab / kaa - 1.0).abs() < 1e-15);
    }
}
