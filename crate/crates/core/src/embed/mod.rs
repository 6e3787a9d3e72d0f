//! Unsupervised graph embeddings: node2vec with mean pooling, and
//! graph2vec as PV-DBOW over Weisfeiler-Lehman subtree documents.

mod graph2vec;
mod node2vec;
mod skipgram;
mod walks;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::binmat;
use crate::error::{Error, Result};

pub use graph2vec::{graph2vec_embedding, pv_dbow_infer, pv_dbow_infer_many, pv_dbow_train, wl_relabel_corpus, Doc2Vec, WlCorpus};
pub use node2vec::{mean_pool, KmerModel, node2vec_graph_embedding, train_node2vec, walk_sentences};
pub use skipgram::{sgns_loss, sgns_update, sigmoid, skipgram_train, SkipGram};
pub use walks::{biased_walks, corpus_walks, Walk};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub p: f64,
    pub q: f64,
    pub negative_samples: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to `1e-4 * lr`.
    pub lr: f64,
    pub wl_height: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dim: 128,
            walks_per_node: 10,
            walk_length: 80,
            window: 10,
            p: 1.0,
            q: 1.0,
            negative_samples: 5,
            epochs: 5,
            lr: 0.025,
            wl_height: 3,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if !(self.p > 0.0 && self.p.is_finite() && self.q > 0.0 && self.q.is_finite()) {
            return bad("p and q must be positive and finite");
        }
        if self.walks_per_node == 0 || self.walk_length == 0 {
            return bad("walks_per_node and walk_length must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMethod {
    Node2vec,
    Graph2vec,
}

impl EmbeddingMethod {
    pub const ALL: [EmbeddingMethod; 2] = [EmbeddingMethod::Node2vec, EmbeddingMethod::Graph2vec];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingMethod::Node2vec => "node2vec",
            EmbeddingMethod::Graph2vec => "graph2vec",
        }
    }
}

impl fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbeddingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "node2vec" => Ok(EmbeddingMethod::Node2vec),
            "graph2vec" => Ok(EmbeddingMethod::Graph2vec),
            other => Err(Error::InvalidConfig(format!("unknown embedding method {other:?}"))),
        }
    }
}

/// One row per graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEmbedding {
    pub method: EmbeddingMethod,
    pub cfg: EmbeddingConfig,
    pub seed: u64,
    pub vectors: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    method: EmbeddingMethod,
    #[serde(rename = "M")]
    m: usize,
    dim: usize,
    cfg: EmbeddingConfig,
    seed: u64,
}

impl GraphEmbedding {
    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(i)
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let header = Header {
            method: self.method,
            m: self.len(),
            dim: self.dim(),
            cfg: self.cfg.clone(),
            seed: self.seed,
        };
        let data: Vec<f64> = self.vectors.iter().copied().collect();
        binmat::write(out, &header, &data)
    }
}

pub fn read_embedding<R: BufRead>(input: R) -> Result<GraphEmbedding> {
    let (h, data): (Header, _) = binmat::read(input, |h: &Header| h.m * h.dim)?;
    let vectors = Array2::from_shape_vec((h.m, h.dim), data).map_err(|e| Error::Format(e.to_string()))?;
    if vectors.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("embedding"));
    }
    Ok(GraphEmbedding {
        method: h.method,
        cfg: h.cfg,
        seed: h.seed,
        vectors,
    })
}
