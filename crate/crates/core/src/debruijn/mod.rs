//! k-mer tokenization and per-read De Bruijn graphs.
//!
//! Nodes are the distinct k-mers of a read; an edge joins each pair of
//! consecutive k-mers and counts how often that pair occurs. Kernels and
//! embeddings mostly see the undirected simple projection of a graph, the
//! multiplicities are kept for sequence reconstruction.

mod graph;
mod graphset;
mod jsonl;
mod kmer;

pub use graph::{build_debruijn, DeBruijnGraph, Edge};
pub use graphset::{graph_stats, GraphSet, GraphStats, MeanSd};
pub use jsonl::{read_jsonl, write_jsonl, GraphRecord};
pub use kmer::{extract_kmers, kmer_frequency_vector, Kmer, KmerSequence, Vocabulary, MAX_K};
