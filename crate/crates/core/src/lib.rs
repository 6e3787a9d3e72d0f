//! Host/pathogen classification of short genome reads through per-read
//! De Bruijn graphs.
//!
//! The crate is organised along the processing chain:
//!
//! * [`sequence_io`] parses FASTA, simulates reads from reference sequences
//!   and draws class-balanced datasets.
//! * [`debruijn`] tokenizes reads into k-mers and builds one labeled De Bruijn
//!   graph per read.
//! * [`kernels`] computes pairwise graph similarities (shortest-path,
//!   Weisfeiler-Lehman, graphlet sampling, random walk).
//! * [`embed`] learns unsupervised graph vectors (node2vec mean pooling and a
//!   graph2vec-style document embedding).
//! * [`baselines`] holds the comparator models (KMeans, logistic regression,
//!   SVM).
//! * [`deepnet`] is the multi-task encoder/decoder/classifier network and its
//!   three-phase training schedule.
//! * [`pipeline`] runs repeated stratified cross-validation, ablations and
//!   report emission.

pub mod baselines;
pub mod binmat;
pub mod debruijn;
pub mod deepnet;
pub mod embed;
pub mod error;
pub mod kernels;
pub mod pipeline;
pub mod seed;
pub mod sequence_io;

pub use error::{Error, Result};
