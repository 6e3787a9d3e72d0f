use std::collections::HashMap;

use ndarray::{Array2, Axis};

use super::config::{ExperimentConfig, FeatureSpec};
use crate::baselines::kmer_frequency_features;
use crate::debruijn::GraphSet;
use crate::embed::{corpus_walks, mean_pool, pv_dbow_infer_many, pv_dbow_train, train_node2vec, wl_relabel_corpus, Walk, WlCorpus};
use crate::error::Result;
use crate::kernels::{kernel_matrix, KernelMatrix};
use crate::seed::{derive, tag};
use crate::sequence_io::Dataset;

/// Everything about the feature space that can be computed without
/// looking at any label or at the fold split.
///
/// Walks depend only on their own graph, WL tokens only on their own
/// graph's neighbourhoods, and kernel entries only on the two graphs of
/// the pair, so they are safe to build once over the whole dataset.
/// Anything fitted (skip-gram, PV-DBOW) is rebuilt per fold from training
/// graphs alone.
pub enum Prepared {
    Dense(Array2<f64>),
    Node2vec { set: GraphSet, walks: Vec<Walk> },
    Graph2vec { corpus: WlCorpus },
    Kernel(KernelMatrix),
}

/// Training and test rows of one fold.
#[derive(Debug, Clone)]
pub struct FoldFeatures {
    pub train: Array2<f64>,
    pub test: Array2<f64>,
    /// Rows are kernel values against the training graphs, so `train` is
    /// also the training Gram matrix.
    pub is_kernel: bool,
}

pub fn prepare(dataset: &Dataset, features: FeatureSpec, k: usize, cfg: &ExperimentConfig) -> Result<Prepared> {
    let seed = derive(cfg.seed, &[tag("features"), k as u64]);
    if features == FeatureSpec::KmerFreq {
        return Ok(Prepared::Dense(kmer_frequency_features(&dataset.reads, k)?.rows));
    }
    let set = GraphSet::from_reads(&dataset.reads, k)?;
    Ok(match features {
        FeatureSpec::Node2vec => {
            cfg.embedding.validate()?;
            let walks = corpus_walks(&set, &cfg.embedding, seed);
            Prepared::Node2vec { set, walks }
        }
        FeatureSpec::Graph2vec => Prepared::Graph2vec { corpus: wl_relabel_corpus(&set, cfg.embedding.wl_height) },
        other => {
            let kind = other.kernel().expect("kernel feature");
            Prepared::Kernel(kernel_matrix(&set, kind, &cfg.kernel, seed, true)?)
        }
    })
}

impl Prepared {
    pub fn len(&self) -> usize {
        match self {
            Prepared::Dense(x) => x.nrows(),
            Prepared::Node2vec { set, .. } => set.len(),
            Prepared::Graph2vec { corpus } => corpus.documents.len(),
            Prepared::Kernel(km) => km.m,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Features for one split. `seed` drives whatever is fitted.
    pub fn fold(&self, train: &[usize], test: &[usize], cfg: &ExperimentConfig, seed: u64) -> Result<FoldFeatures> {
        let (tr, te, is_kernel) = match self {
            Prepared::Dense(x) => (x.select(Axis(0), train), x.select(Axis(0), test), false),
            Prepared::Node2vec { set, walks } => {
                let model = train_node2vec(set, walks, train, &cfg.embedding, seed)?;
                let pool = |idx: &[usize]| {
                    let mut out = Array2::zeros((idx.len(), model.dim()));
                    for (r, &g) in idx.iter().enumerate() {
                        out.row_mut(r).assign(&ndarray::Array1::from(mean_pool(set, &model, g)));
                    }
                    out
                };
                (pool(train), pool(test), false)
            }
            Prepared::Graph2vec { corpus } => {
                // Tokens are renumbered by first appearance in the training
                // documents, so ids (and hence the noise table) do not
                // depend on test graphs; unseen test tokens are dropped.
                let mut ids: HashMap<usize, usize> = HashMap::new();
                let train_docs: Vec<Vec<usize>> = train
                    .iter()
                    .map(|&g| {
                        corpus.documents[g]
                            .iter()
                            .map(|&t| {
                                let next = ids.len();
                                *ids.entry(t).or_insert(next)
                            })
                            .collect()
                    })
                    .collect();
                let test_docs: Vec<Vec<usize>> = test
                    .iter()
                    .map(|&g| corpus.documents[g].iter().filter_map(|t| ids.get(t).copied()).collect())
                    .collect();
                let model = pv_dbow_train(&train_docs, ids.len(), &cfg.embedding, seed)?;
                // Training and test graphs are both embedded by inference
                // against the frozen token vectors, so their rows share one
                // distribution; jointly trained document vectors sit on a
                // different scale from inferred ones.
                let infer = |docs: &[Vec<usize>], idx: &[usize]| -> Result<Array2<f64>> {
                    let docs: Vec<(&[usize], u64)> = docs.iter().map(Vec::as_slice).zip(idx.iter().map(|&g| g as u64)).collect();
                    let mut out = Array2::zeros((idx.len(), model.dim));
                    for (r, v) in pv_dbow_infer_many(&model, &docs, &cfg.embedding, seed)?.into_iter().enumerate() {
                        out.row_mut(r).assign(&ndarray::Array1::from(v));
                    }
                    Ok(out)
                };
                (infer(&train_docs, train)?, infer(&test_docs, test)?, false)
            }
            Prepared::Kernel(km) => (km.select(train, train), km.select(test, train), true),
        };
        Ok(FoldFeatures { train: tr, test: te, is_kernel })
    }
}
