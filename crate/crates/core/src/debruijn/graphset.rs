use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::DeBruijnGraph;
use super::kmer::Vocabulary;
use crate::error::{Error, Result};
use crate::sequence_io::{Label, Read};

/// Graphs built with a common `k` plus a vocabulary covering every node
/// label, ids assigned by first appearance over the graphs in order.
#[derive(Debug, Clone)]
pub struct GraphSet {
    pub graphs: Vec<DeBruijnGraph>,
    pub k: usize,
    pub vocabulary: Vocabulary,
    node_ids: Vec<Vec<usize>>,
}

impl GraphSet {
    pub fn new(graphs: Vec<DeBruijnGraph>, k: usize) -> Result<Self> {
        if let Some(g) = graphs.iter().find(|g| g.k != k) {
            return Err(Error::InvalidConfig(format!(
                "graph {} uses k={}, set uses k={k}",
                g.id, g.k
            )));
        }
        let mut vocabulary = Vocabulary::new(k);
        let node_ids = graphs
            .iter()
            .map(|g| g.nodes.iter().map(|&n| vocabulary.insert(n)).collect())
            .collect();
        Ok(GraphSet {
            graphs,
            k,
            vocabulary,
            node_ids,
        })
    }

    /// One graph per read; construction runs in parallel, output keeps read order.
    pub fn from_reads(reads: &[Read], k: usize) -> Result<Self> {
        let graphs = reads
            .par_iter()
            .map(|r| DeBruijnGraph::from_read(r, k))
            .collect::<Result<Vec<_>>>()?;
        GraphSet::new(graphs, k)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.graphs.iter().map(|g| g.label).collect()
    }

    /// Vocabulary ids of graph `i`'s nodes, aligned with `graphs[i].nodes`.
    pub fn node_ids(&self, i: usize) -> &[usize] {
        &self.node_ids[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    /// Mean and population standard deviation.
    pub fn of(values: &[f64]) -> MeanSd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanSd { mean, sd: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub graphs: usize,
    pub k: usize,
    pub nodes: MeanSd,
    pub edges: MeanSd,
    pub unique_labels: usize,
    pub clustering: MeanSd,
}

/// Average local clustering coefficient of the undirected simple
/// projection; nodes of degree < 2 contribute 0.
pub fn average_clustering(g: &DeBruijnGraph) -> f64 {
    let adj = g.undirected_adjacency();
    if adj.is_empty() {
        return 0.0;
    }
    let total: f64 = adj
        .iter()
        .map(|nbrs| {
            let d = nbrs.len();
            if d < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if adj[a].binary_search(&b).is_ok() {
                        links += 1;
                    }
                }
            }
            2.0 * links as f64 / (d * (d - 1)) as f64
        })
        .sum();
    total / adj.len() as f64
}

pub fn graph_stats(set: &GraphSet) -> Result<GraphStats> {
    if set.is_empty() {
        return Err(Error::Empty("graph set"));
    }
    let nodes: Vec<f64> = set.graphs.iter().map(|g| g.node_count() as f64).collect();
    let edges: Vec<f64> = set.graphs.iter().map(|g| g.edge_count() as f64).collect();
    let clustering: Vec<f64> = set.graphs.iter().map(average_clustering).collect();
    Ok(GraphStats {
        graphs: set.len(),
        k: set.k,
        nodes: MeanSd::of(&nodes),
        edges: MeanSd::of(&edges),
        unique_labels: set.vocabulary.len(),
        clustering: MeanSd::of(&clustering),
    })
}
