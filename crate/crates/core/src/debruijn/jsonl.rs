//! JSON Lines graph files: one object per line,
//! `{"id", "label", "k", "nodes": [k-mer strings], "edges": [[from, to, multiplicity]]}`
//! where `from`/`to` index into `nodes`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::graph::{DeBruijnGraph, Edge};
use super::kmer::Kmer;
use crate::error::{Error, Result};
use crate::sequence_io::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub id: String,
    pub label: Label,
    pub k: usize,
    pub nodes: Vec<String>,
    pub edges: Vec<(u32, u32, u32)>,
}

impl From<&DeBruijnGraph> for GraphRecord {
    fn from(g: &DeBruijnGraph) -> Self {
        GraphRecord {
            id: g.id.clone(),
            label: g.label,
            k: g.k,
            nodes: g.node_labels(),
            edges: g.edges.iter().map(|e| (e.from, e.to, e.multiplicity)).collect(),
        }
    }
}

impl TryFrom<GraphRecord> for DeBruijnGraph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Self> {
        let bad = |why: String| Error::Format(format!("graph {}: {why}", r.id));
        let nodes = r
            .nodes
            .iter()
            .map(|s| {
                if s.len() != r.k {
                    return Err(bad(format!("node {s:?} is not a {}-mer", r.k)));
                }
                Kmer::encode(s.as_bytes()).ok_or_else(|| bad(format!("node {s:?} is not ACGT")))
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = r
            .edges
            .iter()
            .map(|&(from, to, multiplicity)| {
                if from as usize >= nodes.len() || to as usize >= nodes.len() || multiplicity == 0 {
                    return Err(bad(format!("bad edge [{from}, {to}, {multiplicity}]")));
                }
                Ok(Edge { from, to, multiplicity })
            })
            .collect::<Result<Vec<_>>>()?;
        let g = DeBruijnGraph {
            id: r.id.clone(),
            label: r.label,
            k: r.k,
            nodes,
            edges,
        };
        if !g.overlaps_hold() {
            return Err(bad("edge endpoints do not overlap by k-1".into()));
        }
        Ok(g)
    }
}

pub fn write_jsonl<W: Write>(mut out: W, graphs: &[DeBruijnGraph]) -> Result<()> {
    for g in graphs {
        serde_json::to_writer(&mut out, &GraphRecord::from(g))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<DeBruijnGraph>> {
    let mut graphs = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GraphRecord = serde_json::from_str(&line)?;
        graphs.push(rec.try_into()?);
    }
    Ok(graphs)
}
