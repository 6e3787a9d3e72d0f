//! Comparator models: k-means on k-mer frequencies, L2 logistic
//! regression and a C-SVM.

mod features;
mod kmeans;
mod logreg;
mod svm;

pub use features::{kmer_frequency_features, FeatureKind, FeatureMatrix, Standardizer};
pub use kmeans::{kmeans2, permutation_accuracy, KMeansModel};
pub use logreg::{logreg_fit, logreg_objective, LinearModel, LogRegConfig};
pub use svm::{
    rbf_gamma, svm_fit, svm_fit_precomputed, svm_grid_search, svm_solve, DualSolution, SvmConfig, SvmKernel, SvmModel,
};

/// Labels as `+1` (pathogen) and `-1` (host).
pub(crate) fn signed(labels: &[crate::sequence_io::Label]) -> Vec<f64> {
    labels.iter().map(|l| if l.index() == 1 { 1.0 } else { -1.0 }).collect()
}
