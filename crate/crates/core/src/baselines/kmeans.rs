use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seed::{rng_from, tag};

const MAX_ITER: usize = 300;
const SHIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Training accuracy under the better of the two cluster-to-class maps.
    pub accuracy: f64,
    /// Class predicted for each cluster under that map.
    pub cluster_class: [usize; 2],
    pub iterations: usize,
    /// Within-cluster sum of squares after each assignment step.
    pub inertia: Vec<f64>,
    pub empty_cluster: bool,
}

fn dist2(a: ArrayView1<'_, f64>, b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: ArrayView1<'_, f64>, centroids: &[Vec<f64>]) -> (usize, f64) {
    let d0 = dist2(row, &centroids[0]);
    let d1 = dist2(row, &centroids[1]);
    if d1 < d0 {
        (1, d1)
    } else {
        (0, d0)
    }
}

/// Accuracy of a two-cluster assignment under the better label map, and
/// that map.
pub fn permutation_accuracy(assign: &[usize], classes: &[usize]) -> (f64, [usize; 2]) {
    let hits = assign.iter().zip(classes).filter(|(a, c)| a == c).count();
    let n = assign.len().max(1) as f64;
    if hits * 2 >= assign.len() {
        (hits as f64 / n, [0, 1])
    } else {
        ((assign.len() - hits) as f64 / n, [1, 0])
    }
}

/// Lloyd's algorithm with two clusters and k-means++ seeding.
pub fn kmeans2(features: &FeatureMatrix, seed: u64) -> Result<KMeansModel> {
    let x = &features.rows;
    let m = x.nrows();
    if m < 2 {
        return Err(Error::TooFewSamples(m, 2));
    }
    let mut rng = rng_from(seed, &[tag("kmeans")]);
    let first = rng.gen_range(0..m);
    let c0 = x.row(first).to_vec();
    let d2: Vec<f64> = x.rows().into_iter().map(|r| dist2(r, &c0)).collect();
    let total: f64 = d2.iter().sum();
    let second = if total > 0.0 {
        let mut r = rng.gen::<f64>() * total;
        let mut pick = m - 1;
        for (i, d) in d2.iter().enumerate() {
            r -= d;
            if r < 0.0 && *d > 0.0 {
                pick = i;
                break;
            }
        }
        pick
    } else {
        first
    };
    let mut centroids = vec![c0, x.row(second).to_vec()];
    let mut assignments = vec![0; m];
    let mut inertia = Vec::new();
    let mut iterations = 0;
    let mut empty_cluster = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let mut wcss = 0.0;
        for (i, row) in x.rows().into_iter().enumerate() {
            let (c, d) = nearest(row, &centroids);
            assignments[i] = c;
            wcss += d;
        }
        inertia.push(wcss);
        let updated = update_centroids(x.view(), &assignments, &centroids);
        empty_cluster = updated.1;
        let shift = centroids
            .iter()
            .zip(&updated.0)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        centroids = updated.0;
        if shift < SHIFT_TOL {
            break;
        }
    }
    let (accuracy, cluster_class) = permutation_accuracy(&assignments, &features.class_indices());
    Ok(KMeansModel { centroids, assignments, accuracy, cluster_class, iterations, inertia, empty_cluster })
}

/// New means; an empty cluster keeps its previous centroid.
fn update_centroids(x: ArrayView2<'_, f64>, assign: &[usize], old: &[Vec<f64>]) -> (Vec<Vec<f64>>, bool) {
    let mut sums = Array2::<f64>::zeros((2, x.ncols()));
    let mut counts = [0usize; 2];
    for (row, &c) in x.rows().into_iter().zip(assign) {
        let mut s = sums.row_mut(c);
        s += &row;
        counts[c] += 1;
    }
    let mut empty = false;
    let centroids = (0..2)
        .map(|c| {
            if counts[c] == 0 {
                empty = true;
                old[c].clone()
            } else {
                sums.row(c).iter().map(|v| v / counts[c] as f64).collect()
            }
        })
        .collect();
    (centroids, empty)
}

impl KMeansModel {
    pub fn assign(&self, rows: ArrayView2<'_, f64>) -> Vec<usize> {
        rows.rows().into_iter().map(|r| nearest(r, &self.centroids).0).collect()
    }

    /// Classes through the training label map.
    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Vec<usize> {
        self.assign(rows).into_iter().map(|c| self.cluster_class[c]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::FeatureKind;
    use crate::sequence_io::Label;
    use rand_distr::{Distribution, StandardNormal};

    fn normal(rng: &mut crate::seed::Rng) -> f64 {
        StandardNormal.sample(rng)
    }

    fn blobs(m: usize, sep: f64, shuffle_labels: bool) -> FeatureMatrix {
        let mut rng = rng_from(42, &[]);
        let mut rows = Array2::zeros((m, 3));
        let mut labels = Vec::new();
        for i in 0..m {
            let c = i % 2;
            for d in 0..3 {
                rows[[i, d]] = normal(&mut rng) + if c == 1 { sep } else { 0.0 };
            }
            let l = if shuffle_labels { rng.gen_range(0..2) } else { c };
            labels.push(Label::from_index(l));
        }
        FeatureMatrix::new(rows, labels, FeatureKind::Embedding).unwrap()
    }

    #[test]
    fn separated_clouds_are_recovered() {
        let f = blobs(200, 20.0, false);
        let m = kmeans2(&f, 1).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!(!m.empty_cluster);
        assert_eq!(m.predict(f.rows.view()), f.class_indices());
    }

    #[test]
    fn random_labels_give_chance_accuracy() {
        let f = blobs(1000, 3.0, true);
        let m = kmeans2(&f, 2).unwrap();
        assert!((m.accuracy - 0.5).abs() < 0.1, "{}", m.accuracy);
    }

    #[test]
    fn inertia_never_increases() {
        let f = blobs(300, 0.5, false);
        let m = kmeans2(&f, 3).unwrap();
        assert!(m.inertia.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{:?}", m.inertia);
        assert!(m.iterations <= MAX_ITER);
    }

    #[test]
    fn identical_rows_report_empty_cluster() {
        let rows = Array2::from_elem((6, 2), 0.5);
        let labels = (0..6).map(|i| Label::from_index(i % 2)).collect();
        let f = FeatureMatrix::new(rows, labels, FeatureKind::KmerFreq).unwrap();
        let m = kmeans2(&f, 0).unwrap();
        assert!(m.empty_cluster);
        assert_eq!(m.accuracy, 0.5);
    }

    #[test]
    fn permutation_accuracy_takes_better_map() {
        assert_eq!(permutation_accuracy(&[1, 1, 0, 0], &[0, 0, 1, 1]), (1.0, [1, 0]));
        assert_eq!(permutation_accuracy(&[0, 1, 0], &[0, 1, 1]).1, [0, 1]);
    }
}
