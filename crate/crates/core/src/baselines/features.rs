use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::debruijn::{kmer_frequency_vector, Vocabulary};
use crate::error::{Error, Result};
use crate::sequence_io::{Label, Read};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    KmerFreq,
    KernelRow,
    Embedding,
}

/// Feature rows with aligned class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Array2<f64>,
    pub labels: Vec<Label>,
    pub kind: FeatureKind,
}

impl FeatureMatrix {
    pub fn new(rows: Array2<f64>, labels: Vec<Label>, kind: FeatureKind) -> Result<Self> {
        if rows.nrows() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.nrows(), got: labels.len() });
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        Ok(FeatureMatrix { rows, labels, kind })
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn subset(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: self.rows.select(Axis(0), idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            kind: self.kind,
        }
    }

    pub fn class_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.index()).collect()
    }

    pub(crate) fn require_two_classes(&self) -> Result<()> {
        let pathogens = self.labels.iter().filter(|l| l.index() == 1).count();
        if pathogens == 0 || pathogens == self.len() {
            return Err(Error::SingleClass);
        }
        Ok(())
    }
}

/// Normalized k-mer frequencies over all `4^k` k-mers.
pub fn kmer_frequency_features(reads: &[Read], k: usize) -> Result<FeatureMatrix> {
    let vocab = Vocabulary::complete(k)?;
    let mut rows = Array2::zeros((reads.len(), vocab.len()));
    for (i, r) in reads.iter().enumerate() {
        let v = kmer_frequency_vector(r, k, &vocab)?;
        rows.row_mut(i).assign(&Array1::from(v));
    }
    FeatureMatrix::new(rows, reads.iter().map(Read::label).collect(), FeatureKind::KmerFreq)
}

/// Per-column z-scoring with statistics from the fitting rows. Constant
/// columns are centred only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Leaves `dim` columns unchanged.
    pub fn identity(dim: usize) -> Self {
        Standardizer { mean: vec![0.0; dim], scale: vec![1.0; dim] }
    }

    pub fn fit(rows: ArrayView2<'_, f64>) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::Empty("standardizer input"));
        }
        let mean = rows.mean_axis(Axis(0)).expect("non-empty");
        let var = rows.var_axis(Axis(0), 0.0);
        let scale = var.iter().map(|&v| if v > 1e-24 { v.sqrt() } else { 1.0 }).collect();
        Ok(Standardizer { mean: mean.to_vec(), scale })
    }

    pub fn apply(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if rows.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), got: rows.ncols() });
        }
        let mut out = rows.to_owned();
        for mut row in out.rows_mut() {
            for ((x, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *x = (*x - m) / s;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence_io::Source;
    use ndarray::array;

    #[test]
    fn kmer_rows_sum_to_one() {
        let reads = vec![
            Read::new("a", b"ACGTACGT".to_vec(), Label::Host, Source::Simulated).unwrap(),
            Read::new("b", b"TTTTTT".to_vec(), Label::Pathogen, Source::Simulated).unwrap(),
        ];
        let f = kmer_frequency_features(&reads, 2).unwrap();
        assert_eq!(f.dim(), 16);
        for row in f.rows.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
        assert_eq!(f.rows[[1, 15]], 1.0);
        assert_eq!(f.labels, vec![Label::Host, Label::Pathogen]);
    }

    #[test]
    fn rejects_misaligned_and_non_finite() {
        assert!(FeatureMatrix::new(array![[1.0], [2.0]], vec![Label::Host], FeatureKind::Embedding).is_err());
        assert!(FeatureMatrix::new(array![[f64::NAN]], vec![Label::Host], FeatureKind::Embedding).is_err());
    }

    #[test]
    fn standardizer_uses_fit_statistics() {
        let train = array![[1.0, 5.0], [3.0, 5.0]];
        let s = Standardizer::fit(train.view()).unwrap();
        let z = s.apply(train.view()).unwrap();
        assert_eq!(z, array![[-1.0, 0.0], [1.0, 0.0]]);
        assert_eq!(s.apply(array![[5.0, 6.0]].view()).unwrap(), array![[3.0, 1.0]]);
        assert!(s.apply(array![[1.0]].view()).is_err());
    }
}
