use std::collections::HashMap;

use super::{KernelConfig, LabeledGraph};
use crate::error::{Error, Result};

/// Direct product of two labeled graphs restricted to label-matching node
/// pairs: `(u, v) ~ (u', v')` iff `u ~ u'` in `a` and `v ~ v'` in `b`.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    pub nodes: Vec<(usize, usize)>,
    pub adjacency: Vec<Vec<usize>>,
}

fn by_label(g: &LabeledGraph) -> HashMap<u64, Vec<usize>> {
    let mut m: HashMap<u64, Vec<usize>> = HashMap::new();
    for (v, &l) in g.labels.iter().enumerate() {
        m.entry(l).or_default().push(v);
    }
    m
}

impl ProductGraph {
    /// Node count of the product without building it.
    pub fn size(a: &LabeledGraph, b: &LabeledGraph) -> usize {
        let bl = by_label(b);
        a.labels.iter().map(|l| bl.get(l).map_or(0, Vec::len)).sum()
    }

    pub fn new(a: &LabeledGraph, b: &LabeledGraph) -> Self {
        let bl = by_label(b);
        let mut nodes = Vec::new();
        for (u, l) in a.labels.iter().enumerate() {
            if let Some(vs) = bl.get(l) {
                nodes.extend(vs.iter().map(|&v| (u, v)));
            }
        }
        let index: HashMap<(usize, usize), usize> = nodes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let adjacency = nodes
            .iter()
            .map(|&(u, v)| {
                let mut nbrs = Vec::new();
                for &u2 in &a.adjacency[u] {
                    for &v2 in &b.adjacency[v] {
                        if let Some(&j) = index.get(&(u2, v2)) {
                            nbrs.push(j);
                        }
                    }
                }
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        ProductGraph { nodes, adjacency }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterates `x <- 1 + lambda * W x` from `x = 1` until the max-norm
    /// change drops below `tol` or `max_iter` rounds have run. Returns the
    /// iterate and the number of rounds.
    pub fn fixed_point(&self, lambda: f64, max_iter: usize, tol: f64) -> (Vec<f64>, usize) {
        let n = self.len();
        let mut x = vec![1.0; n];
        let mut next = vec![0.0; n];
        for it in 1..=max_iter {
            let mut delta: f64 = 0.0;
            for i in 0..n {
                let s: f64 = self.adjacency[i].iter().map(|&j| x[j]).sum();
                next[i] = 1.0 + lambda * s;
                delta = delta.max((next[i] - x[i]).abs());
            }
            std::mem::swap(&mut x, &mut next);
            if delta < tol {
                return (x, it);
            }
        }
        (x, max_iter)
    }
}

/// Geometric random-walk kernel `1^T (I - lambda W)^{-1} 1` on the
/// label-matched product graph, by fixed-point iteration.
pub fn random_walk_kernel(a: &LabeledGraph, b: &LabeledGraph, cfg: &KernelConfig) -> Result<f64> {
    let size = ProductGraph::size(a, b);
    if size > cfg.rw_product_cap {
        return Err(Error::ProductTooLarge {
            i: 0,
            j: 1,
            product_nodes: size,
            cap: cfg.rw_product_cap,
        });
    }
    let bound = (a.max_degree() * b.max_degree()) as f64;
    if cfg.rw_lambda * bound >= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "rw_lambda {} does not guarantee convergence for max degree product {bound}",
            cfg.rw_lambda
        )));
    }
    let p = ProductGraph::new(a, b);
    let (x, _) = p.fixed_point(cfg.rw_lambda, cfg.rw_max_iter, cfg.rw_tol);
    Ok(x.iter().sum())
}
