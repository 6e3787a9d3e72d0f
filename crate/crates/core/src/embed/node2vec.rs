use std::collections::HashMap;

use ndarray::Array2;

use super::skipgram::{skipgram_train, SkipGram};
use super::walks::{corpus_walks, Walk};
use super::{EmbeddingConfig, EmbeddingMethod, GraphEmbedding};
use crate::debruijn::GraphSet;
use crate::error::{Error, Result};

/// Walks of the selected graphs, rewritten over set-wide k-mer ids.
pub fn walk_sentences(set: &GraphSet, walks: &[Walk], graphs: &[usize]) -> Vec<Vec<usize>> {
    let mut keep = vec![false; set.len()];
    for &g in graphs {
        keep[g] = true;
    }
    walks
        .iter()
        .filter(|w| keep[w.graph])
        .map(|w| {
            let ids = set.node_ids(w.graph);
            w.nodes.iter().map(|&n| ids[n]).collect()
        })
        .collect()
}

/// Skip-gram model over the k-mers of a set of training graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct KmerModel {
    pub skipgram: SkipGram,
    /// Set-wide k-mer id to model token, numbered by first appearance in
    /// the training walks so nothing depends on graphs outside them.
    pub tokens: HashMap<usize, usize>,
}

impl KmerModel {
    pub fn dim(&self) -> usize {
        self.skipgram.dim
    }

    /// Vector of a set-wide k-mer id, if it occurred in training.
    pub fn vector(&self, id: usize) -> Option<&[f64]> {
        self.tokens.get(&id).map(|&t| self.skipgram.vector(t))
    }
}

/// One skip-gram model over the walks of the `train` graphs.
pub fn train_node2vec(
    set: &GraphSet,
    walks: &[Walk],
    train: &[usize],
    cfg: &EmbeddingConfig,
    seed: u64,
) -> Result<KmerModel> {
    let mut tokens = HashMap::new();
    let sentences: Vec<Vec<usize>> = walk_sentences(set, walks, train)
        .into_iter()
        .map(|s| {
            s.into_iter()
                .map(|id| {
                    let next = tokens.len();
                    *tokens.entry(id).or_insert(next)
                })
                .collect()
        })
        .collect();
    let skipgram = skipgram_train(&sentences, tokens.len(), cfg, seed)?;
    Ok(KmerModel { skipgram, tokens })
}

/// Mean of the graph's node vectors, over k-mers the model was trained on.
/// A graph with no such k-mer maps to the zero vector.
pub fn mean_pool(set: &GraphSet, model: &KmerModel, graph: usize) -> Vec<f64> {
    let mut acc = vec![0.0; model.dim()];
    let mut n = 0usize;
    for &id in set.node_ids(graph) {
        if let Some(v) = model.vector(id) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
            n += 1;
        }
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

/// node2vec over every graph of the set with one shared model.
pub fn node2vec_graph_embedding(set: &GraphSet, cfg: &EmbeddingConfig, seed: u64) -> Result<GraphEmbedding> {
    if set.is_empty() {
        return Err(Error::Empty("graph set"));
    }
    cfg.validate()?;
    let walks = corpus_walks(set, cfg, seed);
    let all: Vec<usize> = (0..set.len()).collect();
    let model = train_node2vec(set, &walks, &all, cfg, seed)?;
    let mut vectors = Array2::zeros((set.len(), cfg.dim));
    for i in 0..set.len() {
        for (d, v) in mean_pool(set, &model, i).into_iter().enumerate() {
            vectors[[i, d]] = v;
        }
    }
    Ok(GraphEmbedding { method: EmbeddingMethod::Node2vec, cfg: cfg.clone(), seed, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debruijn::{DeBruijnGraph, Edge, Kmer};
    use crate::sequence_io::{Label, Read, Source};

    fn reads(seqs: &[&str]) -> Vec<Read> {
        seqs.iter()
            .enumerate()
            .map(|(i, s)| Read::new(format!("r{i}"), s.as_bytes().to_vec(), Label::ALL[i % 2], Source::Simulated).unwrap())
            .collect()
    }

    fn small_cfg() -> EmbeddingConfig {
        EmbeddingConfig { dim: 12, walks_per_node: 2, walk_length: 10, window: 3, epochs: 2, ..Default::default() }
    }

    #[test]
    fn rows_have_configured_dim_and_are_seeded() {
        let set = GraphSet::from_reads(&reads(&["ACGTACGGTCA", "TTGACCATGA", "ACGTTTGACC"]), 3).unwrap();
        let e = node2vec_graph_embedding(&set, &small_cfg(), 4).unwrap();
        assert_eq!(e.vectors.dim(), (3, 12));
        assert_eq!(e, node2vec_graph_embedding(&set, &small_cfg(), 4).unwrap());
        assert!(e.vectors.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn identical_node_sets_give_identical_rows() {
        // same k-mers in a different order
        let set = GraphSet::from_reads(&reads(&["AACCGGTT", "AACCGGTT", "GATTACAG"]), 4).unwrap();
        let e = node2vec_graph_embedding(&set, &small_cfg(), 1).unwrap();
        assert_eq!(e.row(0), e.row(1));
    }

    #[test]
    fn single_node_graph_row_is_its_vector() {
        let g = DeBruijnGraph { id: "x".into(), label: Label::Host, k: 3, nodes: vec![Kmer(5)], edges: vec![] };
        let set = GraphSet::new(vec![g], 3).unwrap();
        let cfg = small_cfg();
        let walks = corpus_walks(&set, &cfg, 2);
        let model = train_node2vec(&set, &walks, &[0], &cfg, 2).unwrap();
        let e = node2vec_graph_embedding(&set, &cfg, 2).unwrap();
        assert_eq!(e.row(0).to_vec(), model.vector(set.node_ids(0)[0]).unwrap().to_vec());
    }

    #[test]
    fn pooling_ignores_node_order_and_unseen_kmers() {
        let make = |order: &[u64]| DeBruijnGraph {
            id: "p".into(),
            label: Label::Host,
            k: 3,
            nodes: order.iter().map(|&c| Kmer(c)).collect(),
            edges: vec![Edge { from: 0, to: 1, multiplicity: 1 }],
        };
        let a = make(&[1, 2, 3]);
        let b = make(&[3, 1, 2]);
        let c = make(&[9, 10]);
        let set = GraphSet::new(vec![a, b, c], 3).unwrap();
        let cfg = small_cfg();
        let walks = corpus_walks(&set, &cfg, 0);
        let model = train_node2vec(&set, &walks, &[0, 1], &cfg, 0).unwrap();
        let pa = mean_pool(&set, &model, 0);
        let pb = mean_pool(&set, &model, 1);
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(mean_pool(&set, &model, 2).iter().all(|&v| v == 0.0));
    }
}
