//! Labeled nucleotide reads: FASTA I/O, a substitution-only read simulator,
//! synthetic reference genomes and class-balanced sampling.

mod dataset;
mod fasta;
mod reference;
mod simulate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dataset::{sample_balanced, Dataset, Manifest};
pub use fasta::{parse_fasta, write_fasta, NPolicy};
pub use reference::{synthetic_reference, MarkovProfile};
pub use simulate::{phred_error_probability, simulate_reads, SimulationConfig};

/// Class of a read. `Host` maps to class index 0, `Pathogen` to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Host,
    Pathogen,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Host, Label::Pathogen];

    pub fn index(self) -> usize {
        match self {
            Label::Host => 0,
            Label::Pathogen => 1,
        }
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::Host
        } else {
            Label::Pathogen
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Host => "host",
            Label::Pathogen => "pathogen",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "host" => Ok(Label::Host),
            "pathogen" => Ok(Label::Pathogen),
            other => Err(Error::InvalidConfig(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Simulated,
    File,
}

/// One labeled read over the alphabet `{A, C, G, T}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Read {
    id: String,
    bases: Vec<u8>,
    label: Label,
    source: Source,
}

impl Read {
    /// Validates that `bases` is non-empty and uses only `A`, `C`, `G`, `T`.
    pub fn new(id: impl Into<String>, bases: Vec<u8>, label: Label, source: Source) -> Result<Self> {
        let id = id.into();
        if bases.is_empty() {
            return Err(Error::InvalidRead {
                id,
                reason: "empty sequence".into(),
            });
        }
        if let Some(pos) = bases.iter().position(|b| !matches!(b, b'A' | b'C' | b'G' | b'T')) {
            return Err(Error::InvalidRead {
                id,
                reason: format!("base {:?} at offset {pos}", bases[pos] as char),
            });
        }
        Ok(Read {
            id,
            bases,
            label,
            source,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn bases(&self) -> &[u8] {
        &self.bases
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Same read under a new class; used when a reference file lacks labels.
    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_rejects_bad_alphabet_and_empty() {
        assert!(Read::new("a", b"ACGT".to_vec(), Label::Host, Source::File).is_ok());
        assert!(Read::new("a", b"ACNT".to_vec(), Label::Host, Source::File).is_err());
        assert!(Read::new("a", b"acgt".to_vec(), Label::Host, Source::File).is_err());
        assert!(Read::new("a", vec![], Label::Host, Source::File).is_err());
    }

    #[test]
    fn label_round_trips_through_text_and_index() {
        for l in Label::ALL {
            assert_eq!(l.to_string().parse::<Label>().unwrap(), l);
            assert_eq!(Label::from_index(l.index()), l);
        }
    }
}
