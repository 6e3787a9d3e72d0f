use rand::Rng as _;
use rayon::prelude::*;

use super::EmbeddingConfig;
use crate::debruijn::{DeBruijnGraph, GraphSet};
use crate::seed::{rng_from, tag, Rng};

/// A walk over local node indices of one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub graph: usize,
    pub nodes: Vec<usize>,
}

struct Neighborhoods {
    out: Vec<Vec<usize>>,
    undirected: Vec<Vec<usize>>,
}

impl Neighborhoods {
    fn new(g: &DeBruijnGraph) -> Self {
        let mut undirected = g.undirected_adjacency();
        for list in &mut undirected {
            list.sort_unstable();
        }
        Neighborhoods { out: g.out_adjacency(), undirected }
    }

    /// Out-neighbours, or every neighbour when `v` is a sink.
    fn candidates(&self, v: usize) -> &[usize] {
        if self.out[v].is_empty() {
            &self.undirected[v]
        } else {
            &self.out[v]
        }
    }

    fn step(&self, prev: Option<usize>, v: usize, p: f64, q: f64, rng: &mut Rng) -> Option<usize> {
        let cands = self.candidates(v);
        if cands.is_empty() {
            return None;
        }
        let Some(t) = prev else {
            return Some(cands[rng.gen_range(0..cands.len())]);
        };
        let weight = |x: usize| {
            if x == t {
                1.0 / p
            } else if self.undirected[t].binary_search(&x).is_ok() {
                1.0
            } else {
                1.0 / q
            }
        };
        let total: f64 = cands.iter().map(|&x| weight(x)).sum();
        let mut r = rng.gen::<f64>() * total;
        for &x in cands {
            r -= weight(x);
            if r < 0.0 {
                return Some(x);
            }
        }
        cands.last().copied()
    }
}

/// `walks_per_node` second-order walks from every node, following edge
/// direction and falling back to undirected moves at sinks.
pub fn biased_walks(g: &DeBruijnGraph, graph: usize, cfg: &EmbeddingConfig, seed: u64) -> Vec<Walk> {
    let nb = Neighborhoods::new(g);
    let mut rng = rng_from(seed, &[tag("walk"), graph as u64]);
    let mut walks = Vec::with_capacity(cfg.walks_per_node * g.node_count());
    for _ in 0..cfg.walks_per_node {
        for start in 0..g.node_count() {
            let mut nodes = Vec::with_capacity(cfg.walk_length);
            nodes.push(start);
            let mut prev = None;
            while nodes.len() < cfg.walk_length {
                let v = *nodes.last().unwrap();
                match nb.step(prev, v, cfg.p, cfg.q, &mut rng) {
                    Some(x) => {
                        prev = Some(v);
                        nodes.push(x);
                    }
                    None => break,
                }
            }
            walks.push(Walk { graph, nodes });
        }
    }
    walks
}

/// Walks for every graph of a set, in graph order.
pub fn corpus_walks(set: &GraphSet, cfg: &EmbeddingConfig, seed: u64) -> Vec<Walk> {
    set.graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| biased_walks(g, i, cfg, seed))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
