use std::collections::HashMap;

use ndarray::Array2;
use rand::distributions::{Distribution, WeightedIndex};

use super::skipgram::{decayed, noise_distribution, sgns_update, uniform_init};
use super::{EmbeddingConfig, EmbeddingMethod, GraphEmbedding};
use crate::debruijn::GraphSet;
use crate::error::{Error, Result};
use crate::kernels::{wl_refine, LabeledGraph};
use crate::seed::{rng_from, tag};

/// Weisfeiler-Lehman subtree documents with a shared token dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlCorpus {
    pub documents: Vec<Vec<usize>>,
    pub vocab_size: usize,
}

/// Document `i` holds the labels of every node of graph `i` at every
/// refinement round `0..=height`.
pub fn wl_relabel_corpus(set: &GraphSet, height: usize) -> WlCorpus {
    let graphs: Vec<LabeledGraph> = set.graphs.iter().map(LabeledGraph::from).collect();
    let refined = wl_refine(&graphs, height);
    let mut dict: HashMap<(usize, u64), usize> = HashMap::new();
    let documents = refined
        .iter()
        .map(|rounds| {
            let mut doc = Vec::new();
            for (r, labels) in rounds.iter().enumerate() {
                for &l in labels {
                    let next = dict.len();
                    doc.push(*dict.entry((r, l)).or_insert(next));
                }
            }
            doc
        })
        .collect();
    WlCorpus { documents, vocab_size: dict.len() }
}

/// PV-DBOW model: one vector per training document plus token output
/// vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Doc2Vec {
    pub dim: usize,
    pub docs: Vec<f64>,
    pub output: Vec<f64>,
    pub counts: Vec<u64>,
    pub losses: Vec<f64>,
}

impl Doc2Vec {
    pub fn doc(&self, i: usize) -> &[f64] {
        &self.docs[i * self.dim..(i + 1) * self.dim]
    }
}

/// Token output vectors: updated during training, read-only at inference.
enum Output<'a> {
    Train(&'a mut [f64]),
    Frozen(&'a [f64]),
}

/// Trains document vectors to predict their own tokens against noise
/// tokens.
fn fit_docs(
    docs: &mut [f64],
    mut output: Output<'_>,
    documents: &[&[usize]],
    counts: &[u64],
    noise: &WeightedIndex<f64>,
    cfg: &EmbeddingConfig,
    rng: &mut crate::seed::Rng,
) -> Vec<f64> {
    let dim = cfg.dim;
    let tokens: usize = documents.iter().map(|d| d.iter().filter(|&&t| counts[t] > 0).count()).sum();
    let total = tokens * cfg.epochs;
    let mut done = 0;
    let mut step = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let (mut loss, mut n) = (0.0, 0usize);
        for (d, doc) in documents.iter().enumerate() {
            for &t in doc.iter().filter(|&&t| counts[t] > 0) {
                let alpha = decayed(cfg.lr, done, total);
                done += 1;
                step.fill(0.0);
                let u = &docs[d * dim..(d + 1) * dim];
                let mut term = |target: usize, label: f64, step: &mut [f64]| {
                    let range = target * dim..(target + 1) * dim;
                    match &mut output {
                        Output::Train(out) => sgns_update(u, &mut out[range], label, alpha, step),
                        Output::Frozen(out) => {
                            scratch.copy_from_slice(&out[range]);
                            sgns_update(u, &mut scratch, label, alpha, step)
                        }
                    }
                };
                loss += term(t, 1.0, &mut step);
                for _ in 0..cfg.negative_samples {
                    let neg = noise.sample(rng);
                    if neg != t {
                        loss += term(neg, 0.0, &mut step);
                    }
                }
                for (a, s) in docs[d * dim..(d + 1) * dim].iter_mut().zip(&step) {
                    *a += s;
                }
                n += 1;
            }
        }
        losses.push(if n > 0 { loss / n as f64 } else { 0.0 });
    }
    losses
}

pub fn pv_dbow_train(documents: &[Vec<usize>], vocab_size: usize, cfg: &EmbeddingConfig, seed: u64) -> Result<Doc2Vec> {
    cfg.validate()?;
    if documents.is_empty() {
        return Err(Error::Empty("document set"));
    }
    let mut counts = vec![0u64; vocab_size];
    for &t in documents.iter().flatten() {
        if t >= vocab_size {
            return Err(Error::DimensionMismatch { expected: vocab_size, got: t + 1 });
        }
        counts[t] += 1;
    }
    let dim = cfg.dim;
    let mut rng = rng_from(seed, &[tag("pv-dbow")]);
    let mut docs = uniform_init(&mut rng, documents.len() * dim, dim);
    let mut output = vec![0.0; vocab_size * dim];
    let refs: Vec<&[usize]> = documents.iter().map(Vec::as_slice).collect();
    let losses = if cfg.epochs == 0 {
        Vec::new()
    } else {
        let noise = noise_distribution(&counts)?;
        fit_docs(&mut docs, Output::Train(&mut output), &refs, &counts, &noise, cfg, &mut rng)
    };
    Ok(Doc2Vec { dim, docs, output, counts, losses })
}

/// Vector for an unseen document with the output vectors held fixed.
/// Tokens absent from training are ignored. `index` keys the document's
/// random stream.
pub fn pv_dbow_infer(model: &Doc2Vec, document: &[usize], cfg: &EmbeddingConfig, seed: u64, index: u64) -> Result<Vec<f64>> {
    Ok(pv_dbow_infer_many(model, &[(document, index)], cfg, seed)?.remove(0))
}

/// [`pv_dbow_infer`] over several documents, sharing the noise table.
pub fn pv_dbow_infer_many(
    model: &Doc2Vec,
    documents: &[(&[usize], u64)],
    cfg: &EmbeddingConfig,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let noise = noise_distribution(&model.counts)?;
    let cfg = EmbeddingConfig { dim: model.dim, ..cfg.clone() };
    Ok(documents
        .iter()
        .map(|&(document, index)| {
            let mut rng = rng_from(seed, &[tag("pv-dbow-infer"), index]);
            let mut doc = uniform_init(&mut rng, model.dim, model.dim);
            let known: Vec<usize> = document.iter().copied().filter(|&t| t < model.counts.len()).collect();
            if cfg.epochs > 0 && known.iter().any(|&t| model.counts[t] > 0) {
                fit_docs(&mut doc, Output::Frozen(&model.output), &[&known], &model.counts, &noise, &cfg, &mut rng);
            }
            doc
        })
        .collect())
}

/// graph2vec over every graph of the set.
pub fn graph2vec_embedding(set: &GraphSet, cfg: &EmbeddingConfig, seed: u64) -> Result<GraphEmbedding> {
    if set.is_empty() {
        return Err(Error::Empty("graph set"));
    }
    let corpus = wl_relabel_corpus(set, cfg.wl_height);
    let model = pv_dbow_train(&corpus.documents, corpus.vocab_size, cfg, seed)?;
    let vectors = Array2::from_shape_vec((set.len(), cfg.dim), model.docs).map_err(|e| Error::Format(e.to_string()))?;
    Ok(GraphEmbedding { method: EmbeddingMethod::Graph2vec, cfg: cfg.clone(), seed, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debruijn::{DeBruijnGraph, Edge, Kmer};
    use crate::sequence_io::Label;

    fn graph(labels: &[u64], edges: &[(u32, u32)]) -> DeBruijnGraph {
        DeBruijnGraph {
            id: "g".into(),
            label: Label::Host,
            k: 3,
            nodes: labels.iter().map(|&c| Kmer(c)).collect(),
            edges: edges.iter().map(|&(from, to)| Edge { from, to, multiplicity: 1 }).collect(),
        }
    }

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    #[test]
    fn height_zero_documents_are_raw_labels() {
        let set = GraphSet::new(vec![graph(&[4, 7, 4], &[(0, 1)]), graph(&[7], &[])], 3).unwrap();
        let c = wl_relabel_corpus(&set, 0);
        assert_eq!(c.documents, vec![vec![0, 1, 0], vec![1]]);
    }

    #[test]
    fn two_node_path_height_one_has_four_tokens() {
        let set = GraphSet::new(vec![graph(&[1, 2], &[(0, 1)])], 3).unwrap();
        let c = wl_relabel_corpus(&set, 1);
        assert_eq!(c.documents[0].len(), 4);
        assert_eq!(c.vocab_size, 4);
    }

    #[test]
    fn isomorphic_graphs_share_documents() {
        let a = graph(&[1, 2, 3], &[(0, 1), (1, 2)]);
        let b = graph(&[3, 2, 1], &[(1, 0), (2, 1)]);
        let set = GraphSet::new(vec![a, b], 3).unwrap();
        let c = wl_relabel_corpus(&set, 2);
        let mut d0 = c.documents[0].clone();
        let mut d1 = c.documents[1].clone();
        d0.sort_unstable();
        d1.sort_unstable();
        assert_eq!(d0, d1);
    }

    #[test]
    fn zero_epochs_keep_initialization() {
        let docs = vec![vec![0, 1], vec![1, 2]];
        let cfg = EmbeddingConfig { dim: 5, epochs: 0, ..Default::default() };
        let m = pv_dbow_train(&docs, 3, &cfg, 7).unwrap();
        let mut rng = rng_from(7, &[tag("pv-dbow")]);
        assert_eq!(m.docs, uniform_init(&mut rng, 10, 5));
    }

    #[test]
    fn identical_documents_end_up_closest() {
        let a = graph(&[1, 2, 3, 4], &[(0, 1), (1, 2), (2, 3)]);
        let c = graph(&[10, 11, 12, 13], &[(0, 1), (1, 2), (2, 3)]);
        let set = GraphSet::new(vec![a.clone(), a, c], 3).unwrap();
        let cfg = EmbeddingConfig { dim: 16, epochs: 200, negative_samples: 5, lr: 0.05, ..Default::default() };
        let e = graph2vec_embedding(&set, &cfg, 3).unwrap();
        let r: Vec<Vec<f64>> = (0..3).map(|i| e.row(i).to_vec()).collect();
        assert!(cosine(&r[0], &r[1]) > cosine(&r[0], &r[2]));
        assert!(cosine(&r[0], &r[1]) > cosine(&r[1], &r[2]));
        assert_eq!(e, graph2vec_embedding(&set, &cfg, 3).unwrap());
    }

    #[test]
    fn inference_places_duplicate_near_its_twin() {
        let docs = vec![vec![0, 1, 2, 0, 1], vec![3, 4, 5, 3, 4]];
        let cfg = EmbeddingConfig { dim: 16, epochs: 200, lr: 0.05, ..Default::default() };
        let m = pv_dbow_train(&docs, 7, &cfg, 1).unwrap();
        let v = pv_dbow_infer(&m, &[0, 1, 2, 6], &cfg, 1, 0).unwrap();
        assert!(cosine(&v, m.doc(0)) > cosine(&v, m.doc(1)));
        assert_eq!(v, pv_dbow_infer(&m, &[0, 1, 2, 6], &cfg, 1, 0).unwrap());
    }
}
