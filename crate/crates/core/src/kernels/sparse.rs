use std::collections::BTreeMap;

use rayon::prelude::*;

/// Sparse vector with strictly increasing keys.
pub type SparseVec<K> = Vec<(K, f64)>;

/// Builds a sparse vector from a key histogram.
pub(crate) fn from_counts<K: Ord>(counts: BTreeMap<K, f64>) -> SparseVec<K> {
    counts.into_iter().collect()
}

pub fn sparse_dot<K: Ord>(a: &[(K, f64)], b: &[(K, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Row-major upper-triangle-mirrored Gram matrix `G[i][j] = <x_i, x_j>`.
///
/// Keys are mapped to dense ids in sorted order and the products are
/// accumulated through an inverted index, so every entry is summed in the
/// same order regardless of thread scheduling.
pub fn gram_matrix<K: Ord + Clone + Send + Sync>(features: &[SparseVec<K>]) -> Vec<f64> {
    let m = features.len();
    let mut dict: BTreeMap<K, usize> = BTreeMap::new();
    for f in features {
        for (k, _) in f {
            dict.entry(k.clone()).or_insert(0);
        }
    }
    for (id, v) in dict.values_mut().enumerate() {
        *v = id;
    }
    let mut postings: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dict.len()];
    let dense: Vec<Vec<(usize, f64)>> = features
        .iter()
        .map(|f| f.iter().map(|(k, v)| (dict[k], *v)).collect())
        .collect();
    for (g, f) in dense.iter().enumerate() {
        for &(id, v) in f {
            postings[id].push((g, v));
        }
    }
    // Row i accumulates <x_i, x_j> for j >= i by walking the postings of
    // each feature of x_i; postings are sorted by graph index.
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; m - i];
            for &(id, vi) in &dense[i] {
                let list = &postings[id];
                let start = list.partition_point(|&(g, _)| g < i);
                for &(g, vg) in &list[start..] {
                    row[g - i] += vi * vg;
                }
            }
            row
        })
        .collect();
    let mut out = vec![0.0; m * m];
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            out[i * m + j] = v;
            out[j * m + i] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_merges_sorted_keys() {
        let a = vec![(1u32, 2.0), (3, 1.0), (7, 4.0)];
        let b = vec![(0u32, 5.0), (3, 3.0), (7, 0.5)];
        assert_eq!(sparse_dot(&a, &b), 5.0);
        assert_eq!(sparse_dot::<u32>(&a, &[]), 0.0);
    }

    #[test]
    fn gram_matches_pairwise_dots() {
        let f = vec![
            vec![(1u32, 2.0), (3, 1.0)],
            vec![(3u32, 3.0), (9, 1.0)],
            vec![],
            vec![(1u32, 1.0), (9, 2.0)],
        ];
        let g = gram_matrix(&f);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g[i * 4 + j], sparse_dot(&f[i], &f[j]));
            }
        }
    }
}
