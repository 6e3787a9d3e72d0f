use std::io::{BufRead, Write};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graphlet::graphlet_histogram;
use super::random_walk::{random_walk_kernel, ProductGraph};
use super::shortest_path::shortest_path_features;
use super::sparse::gram_matrix;
use super::wl::{wl_features, wl_refine};
use super::{KernelConfig, KernelKind, LabeledGraph};
use crate::binmat;
use crate::debruijn::GraphSet;
use crate::error::{Error, Result};

/// Symmetric `M x M` similarity matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub kind: KernelKind,
    pub m: usize,
    pub normalized: bool,
    pub cfg: KernelConfig,
    pub seed: u64,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: KernelKind,
    #[serde(rename = "M")]
    m: usize,
    normalized: bool,
    cfg: KernelConfig,
    seed: u64,
}

impl KernelMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bitwise symmetry check.
    pub fn is_symmetric(&self) -> bool {
        (0..self.m).all(|i| (0..i).all(|j| self.get(i, j).to_bits() == self.get(j, i).to_bits()))
    }

    /// Kernel values of graphs `rows` against graphs `cols`.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Array2<f64> {
        Array2::from_shape_fn((rows.len(), cols.len()), |(r, c)| self.get(rows[r], cols[c]))
    }

    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.m, self.m), self.values.clone()).expect("square shape")
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let header = Header {
            kind: self.kind,
            m: self.m,
            normalized: self.normalized,
            cfg: self.cfg.clone(),
            seed: self.seed,
        };
        binmat::write(out, &header, &self.values)
    }
}

pub fn read_kernel_matrix<R: BufRead>(input: R) -> Result<KernelMatrix> {
    let (h, values): (Header, _) = binmat::read(input, |h: &Header| h.m * h.m)?;
    Ok(KernelMatrix {
        kind: h.kind,
        m: h.m,
        normalized: h.normalized,
        cfg: h.cfg,
        seed: h.seed,
        values,
    })
}

fn dense_gram(vectors: &[Vec<f64>]) -> Vec<f64> {
    let m = vectors.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (i..m)
                .map(|j| vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    mirror(m, rows)
}

fn mirror(m: usize, upper: Vec<Vec<f64>>) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            out[i * m + i + off] = v;
            out[(i + off) * m + i] = v;
        }
    }
    out
}

fn random_walk_gram(graphs: &[LabeledGraph], cfg: &KernelConfig) -> Result<Vec<f64>> {
    let m = graphs.len();
    for i in 0..m {
        for j in i..m {
            let size = ProductGraph::size(&graphs[i], &graphs[j]);
            if size > cfg.rw_product_cap {
                return Err(Error::ProductTooLarge {
                    i,
                    j,
                    product_nodes: size,
                    cap: cfg.rw_product_cap,
                });
            }
        }
    }
    let rows = (0..m)
        .into_par_iter()
        .map(|i| {
            (i..m)
                .map(|j| random_walk_kernel(&graphs[i], &graphs[j], cfg))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mirror(m, rows))
}

/// Cosine normalization `k(i,j) / sqrt(k(i,i) k(j,j))`, clamped to
/// `[-1, 1]`. A graph with zero self-similarity keeps 1 on the diagonal
/// and 0 elsewhere.
fn normalize(m: usize, raw: &[f64]) -> Vec<f64> {
    let diag: Vec<f64> = (0..m).map(|i| raw[i * m + i]).collect();
    let upper = (0..m)
        .map(|i| {
            (i..m)
                .map(|j| {
                    if i == j {
                        1.0
                    } else if diag[i] > 0.0 && diag[j] > 0.0 {
                        (raw[i * m + j] / (diag[i] * diag[j]).sqrt()).clamp(-1.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    mirror(m, upper)
}

/// All-pairs kernel matrix over arbitrary labeled graphs. Each unordered
/// pair is evaluated once and mirrored.
pub fn kernel_matrix_labeled(
    graphs: &[LabeledGraph],
    kind: KernelKind,
    cfg: &KernelConfig,
    seed: u64,
    normalized: bool,
) -> Result<KernelMatrix> {
    if graphs.is_empty() {
        return Err(Error::Empty("graph set"));
    }
    cfg.validate()?;
    let m = graphs.len();
    let raw = match kind {
        KernelKind::Spk => {
            let feats: Vec<_> = graphs
                .par_iter()
                .map(|g| shortest_path_features(g, cfg.sp_max_length))
                .collect();
            gram_matrix(&feats)
        }
        KernelKind::Wlk => {
            let labels = wl_refine(graphs, cfg.wl_iterations);
            let feats: Vec<_> = labels.iter().map(|l| wl_features(l)).collect();
            gram_matrix(&feats)
        }
        KernelKind::Gsk => {
            let hists: Vec<Vec<f64>> = graphs
                .par_iter()
                .map(|g| {
                    graphlet_histogram(g, cfg.graphlet_size, cfg.graphlet_samples, seed)
                        .unwrap_or_else(|| vec![0.0; super::graphlet_class_count(cfg.graphlet_size)])
                })
                .collect();
            dense_gram(&hists)
        }
        KernelKind::Rwk => random_walk_gram(graphs, cfg)?,
    };
    let values = if normalized { normalize(m, &raw) } else { raw };
    Ok(KernelMatrix {
        kind,
        m,
        normalized,
        cfg: cfg.clone(),
        seed,
        values,
    })
}

/// Kernel matrix over the undirected simple projections of a graph set.
pub fn kernel_matrix(
    set: &GraphSet,
    kind: KernelKind,
    cfg: &KernelConfig,
    seed: u64,
    normalized: bool,
) -> Result<KernelMatrix> {
    let graphs: Vec<LabeledGraph> = set.graphs.iter().map(LabeledGraph::from).collect();
    kernel_matrix_labeled(&graphs, kind, cfg, seed, normalized)
}
