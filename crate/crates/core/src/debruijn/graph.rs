use std::collections::HashMap;

use super::kmer::{extract_kmers, Kmer, KmerSequence};
use crate::error::{Error, Result};
use crate::sequence_io::{Label, Read};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub multiplicity: u32,
}

/// Directed De Bruijn graph of a single read. `nodes` are distinct k-mers in
/// first-appearance order; edges index into `nodes` and are also kept in
/// first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeBruijnGraph {
    pub id: String,
    pub label: Label,
    pub k: usize,
    pub nodes: Vec<Kmer>,
    pub edges: Vec<Edge>,
}

/// Builds the graph of a token sequence. Repeated k-mers merge into one
/// node, and each consecutive token pair adds one to its edge multiplicity.
pub fn build_debruijn(kmers: &KmerSequence, label: Label) -> Result<DeBruijnGraph> {
    if kmers.tokens.is_empty() {
        return Err(Error::Empty("k-mer sequence"));
    }
    let mut index: HashMap<Kmer, u32> = HashMap::with_capacity(kmers.tokens.len());
    let mut nodes = Vec::new();
    let ids: Vec<u32> = kmers
        .tokens
        .iter()
        .map(|&t| {
            *index.entry(t).or_insert_with(|| {
                nodes.push(t);
                nodes.len() as u32 - 1
            })
        })
        .collect();

    let mut edge_pos: HashMap<(u32, u32), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    for w in ids.windows(2) {
        let pos = *edge_pos.entry((w[0], w[1])).or_insert_with(|| {
            edges.push(Edge {
                from: w[0],
                to: w[1],
                multiplicity: 0,
            });
            edges.len() - 1
        });
        edges[pos].multiplicity += 1;
    }
    Ok(DeBruijnGraph {
        id: String::new(),
        label,
        k: kmers.k,
        nodes,
        edges,
    })
}

impl DeBruijnGraph {
    pub fn from_read(read: &Read, k: usize) -> Result<Self> {
        let mut g = build_debruijn(&extract_kmers(read, k)?, read.label())?;
        g.id = read.id().to_string();
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of distinct directed edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.edges.iter().map(|e| e.multiplicity as u64).sum()
    }

    pub fn node_labels(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.decode(self.k)).collect()
    }

    /// Sorted, de-duplicated neighbour lists of the undirected simple
    /// projection (self-loops dropped).
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            let (a, b) = (e.from as usize, e.to as usize);
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Sorted distinct successors, self-loops included.
    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.from as usize].push(e.to as usize);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Checks the overlap invariant: every edge `(u, v)` has
    /// `suffix(u, k-1) == prefix(v, k-1)`.
    pub fn overlaps_hold(&self) -> bool {
        self.edges.iter().all(|e| {
            self.nodes[e.from as usize].suffix(self.k) == self.nodes[e.to as usize].prefix()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence_io::Source;

    fn graph(s: &str, k: usize) -> DeBruijnGraph {
        let r = Read::new("r", s.as_bytes().to_vec(), Label::Host, Source::File).unwrap();
        DeBruijnGraph::from_read(&r, k).unwrap()
    }

    fn edge_set(g: &DeBruijnGraph) -> Vec<(String, String, u32)> {
        let labels = g.node_labels();
        let mut v: Vec<_> = g
            .edges
            .iter()
            .map(|e| (labels[e.from as usize].clone(), labels[e.to as usize].clone(), e.multiplicity))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn path_without_repeats() {
        let g = graph("ATGGCA", 3);
        assert_eq!(g.node_labels(), ["ATG", "TGG", "GGC", "GCA"]);
        assert_eq!(g.edge_count(), 3);
        assert!(g.edges.iter().all(|e| e.multiplicity == 1));
        assert!(g.overlaps_hold());
    }

    #[test]
    fn repeats_merge() {
        // ATA TAT ATA TAT: pairs ATA>TAT, TAT>ATA, ATA>TAT.
        let g = graph("ATATAT", 3);
        assert_eq!(g.node_labels(), ["ATA", "TAT"]);
        assert_eq!(
            edge_set(&g),
            [("ATA".into(), "TAT".into(), 2), ("TAT".into(), "ATA".into(), 1)]
        );
        assert_eq!(g.total_multiplicity(), 3);
    }

    #[test]
    fn single_token_and_self_loop() {
        let g = graph("ACG", 3);
        assert_eq!((g.node_count(), g.edge_count()), (1, 0));
        let g = graph("AAAA", 2);
        assert_eq!(edge_set(&g), [("AA".into(), "AA".into(), 2)]);
        assert_eq!(g.undirected_adjacency(), vec![Vec::<usize>::new()]);
        assert_eq!(g.out_adjacency(), vec![vec![0]]);
    }

    #[test]
    fn empty_tokens_rejected() {
        let seq = KmerSequence { k: 3, tokens: vec![] };
        assert!(build_debruijn(&seq, Label::Host).is_err());
    }

    #[test]
    fn undirected_projection_merges_antiparallel_edges() {
        let g = graph("ATATAT", 3);
        assert_eq!(g.undirected_adjacency(), vec![vec![1], vec![0]]);
    }
}
