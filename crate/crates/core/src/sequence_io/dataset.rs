use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{Label, Read};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub reads: Vec<Read>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, reads: Vec<Read>) -> Self {
        Dataset {
            name: name.into(),
            reads,
        }
    }

    pub fn labels(&self) -> Vec<Label> {
        self.reads.iter().map(Read::label).collect()
    }

    /// Reads per class, indexed by [`Label::index`].
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for r in &self.reads {
            counts[r.label().index()] += 1;
        }
        counts
    }

    pub fn manifest(&self, per_class: usize, seed: u64, fasta: Option<String>) -> Manifest {
        Manifest {
            name: self.name.clone(),
            per_class,
            seed,
            fasta,
            ids: self.reads.iter().map(|r| r.id().to_string()).collect(),
            labels: self.labels(),
        }
    }
}

/// JSON description of a sampled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub per_class: usize,
    pub seed: u64,
    /// FASTA holding the reads, relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fasta: Option<String>,
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
}

fn draw(pool: &[Read], expected: Label, per_class: usize, rng: &mut seed::Rng) -> Result<Vec<Read>> {
    if let Some(r) = pool.iter().find(|r| r.label() != expected) {
        return Err(Error::InvalidConfig(format!(
            "read {} in the {expected} pool is labeled {}",
            r.id(),
            r.label()
        )));
    }
    if pool.len() < per_class {
        return Err(Error::InsufficientPool {
            label: expected.to_string(),
            available: pool.len(),
            requested: per_class,
        });
    }
    Ok(index::sample(rng, pool.len(), per_class)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect())
}

/// Draws `per_class` reads of each class without replacement. Host reads
/// come first, each block in sampling order.
pub fn sample_balanced(host: &[Read], pathogen: &[Read], per_class: usize, seed: u64) -> Result<Dataset> {
    let mut rng = seed::rng_from(seed, &[seed::tag("sample_balanced")]);
    let mut reads = draw(host, Label::Host, per_class, &mut rng)?;
    reads.extend(draw(pathogen, Label::Pathogen, per_class, &mut rng)?);
    Ok(Dataset::new(format!("balanced_{per_class}"), reads))
}
