//! Graph kernels on undirected labeled graphs: shortest-path (SPK),
//! Weisfeiler-Lehman subtree (WLK), graphlet sampling (GSK) and geometric
//! random walk (RWK), plus whole-set kernel matrices.

mod graphlet;
mod matrix;
mod random_walk;
mod shortest_path;
mod sparse;
mod wl;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::debruijn::DeBruijnGraph;
use crate::error::{Error, Result};

pub use graphlet::{graphlet_class_count, graphlet_histogram, graphlet_kernel, GraphletSimilarity};
pub use matrix::{kernel_matrix, kernel_matrix_labeled, read_kernel_matrix, KernelMatrix};
pub use random_walk::{random_walk_kernel, ProductGraph};
pub use shortest_path::{shortest_path_features, shortest_path_kernel, SpFeature};
pub use sparse::{gram_matrix, sparse_dot, SparseVec};
pub use wl::{wl_features, wl_kernel, wl_refine};

/// Undirected simple graph with integer node labels. Neighbour lists are
/// sorted and free of self-loops and duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub labels: Vec<u64>,
    pub adjacency: Vec<Vec<usize>>,
}

impl LabeledGraph {
    pub fn new(labels: Vec<u64>, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); labels.len()];
        for &(a, b) in edges {
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        LabeledGraph { labels, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }
}

impl From<&DeBruijnGraph> for LabeledGraph {
    fn from(g: &DeBruijnGraph) -> Self {
        LabeledGraph {
            labels: g.nodes.iter().map(|n| n.0).collect(),
            adjacency: g.undirected_adjacency(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Spk,
    Wlk,
    Gsk,
    Rwk,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [KernelKind::Spk, KernelKind::Wlk, KernelKind::Gsk, KernelKind::Rwk];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Spk => "spk",
            KernelKind::Wlk => "wlk",
            KernelKind::Gsk => "gsk",
            KernelKind::Rwk => "rwk",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown kernel {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub wl_iterations: usize,
    pub graphlet_size: usize,
    pub graphlet_samples: usize,
    /// Random-walk decay. Each pair must satisfy
    /// `rw_lambda * maxdeg(a) * maxdeg(b) < 1`.
    pub rw_lambda: f64,
    pub rw_max_iter: usize,
    pub rw_tol: f64,
    /// Largest product graph (in nodes) the random-walk kernel will build.
    pub rw_product_cap: usize,
    /// Shortest paths longer than this are not counted.
    pub sp_max_length: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            wl_iterations: 3,
            graphlet_size: 4,
            graphlet_samples: 200,
            rw_lambda: 0.01,
            rw_max_iter: 1000,
            rw_tol: 1e-10,
            rw_product_cap: 250_000,
            sp_max_length: 10,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(3..=5).contains(&self.graphlet_size) {
            return Err(Error::InvalidConfig(format!(
                "graphlet_size must lie in 3..=5, got {}",
                self.graphlet_size
            )));
        }
        if self.graphlet_samples == 0 {
            return Err(Error::InvalidConfig("graphlet_samples must be positive".into()));
        }
        if !(self.rw_lambda >= 0.0 && self.rw_lambda < 1.0) || !(self.rw_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need 0 <= rw_lambda < 1 and rw_tol > 0, got {} / {}",
                self.rw_lambda, self.rw_tol
            )));
        }
        if self.sp_max_length == 0 {
            return Err(Error::InvalidConfig("sp_max_length must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_of_debruijn_graph() {
        use crate::sequence_io::{Label, Read, Source};
        let r = Read::new("r", b"ATATAT".to_vec(), Label::Host, Source::File).unwrap();
        let g = LabeledGraph::from(&DeBruijnGraph::from_read(&r, 3).unwrap());
        assert_eq!(g.adjacency, vec![vec![1], vec![0]]);
        assert_eq!(g.max_degree(), 1);
    }

    #[test]
    fn kind_names_parse() {
        for k in KernelKind::ALL {
            assert_eq!(k.name().parse::<KernelKind>().unwrap(), k);
        }
        assert!("xyz".parse::<KernelKind>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(KernelConfig::default().validate().is_ok());
        let bad = KernelConfig { graphlet_size: 6, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = KernelConfig { rw_lambda: -0.1, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
