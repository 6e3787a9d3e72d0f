use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Label, Read, Source};
use crate::error::{Error, Result};

/// What to do with records that contain `N` bases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NPolicy {
    /// Skip the whole record.
    #[default]
    Drop,
    /// Keep the maximal `N`-free fragments as reads `<id>_1`, `<id>_2`, ...
    Split,
}

struct Record {
    index: usize,
    header: String,
    seq: Vec<u8>,
}

/// Parses FASTA text into reads.
///
/// The record id is the first whitespace-delimited header token. A
/// `label=host|pathogen` token elsewhere in the header overrides
/// `default_label`. Bases are uppercased; anything outside `ACGTN` is an
/// error, `N` is handled by `policy`.
pub fn parse_fasta<R: BufRead>(source: R, default_label: Label, policy: NPolicy) -> Result<Vec<Read>> {
    let mut reads = Vec::new();
    let mut current: Option<Record> = None;
    let mut count = 0usize;

    for line in source.lines() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if let Some(header) = line.strip_prefix('>') {
            if let Some(rec) = current.take() {
                finish(rec, default_label, policy, &mut reads)?;
            }
            current = Some(Record {
                index: count,
                header: header.to_string(),
                seq: Vec::new(),
            });
            count += 1;
        } else if line.trim().is_empty() {
            continue;
        } else {
            let Some(rec) = current.as_mut() else {
                return Err(Error::Fasta {
                    record: 0,
                    reason: "sequence data before the first '>' header".into(),
                });
            };
            for &b in line.trim().as_bytes() {
                let up = b.to_ascii_uppercase();
                if !matches!(up, b'A' | b'C' | b'G' | b'T' | b'N') {
                    return Err(Error::Fasta {
                        record: rec.index,
                        reason: format!("invalid base {:?}", b as char),
                    });
                }
                rec.seq.push(up);
            }
        }
    }
    if let Some(rec) = current.take() {
        finish(rec, default_label, policy, &mut reads)?;
    }
    Ok(reads)
}

fn finish(rec: Record, default_label: Label, policy: NPolicy, out: &mut Vec<Read>) -> Result<()> {
    let mut tokens = rec.header.split_whitespace();
    let id = tokens.next().ok_or_else(|| Error::Fasta {
        record: rec.index,
        reason: "header without an id".into(),
    })?;
    let mut label = default_label;
    for tok in tokens {
        if let Some(v) = tok.strip_prefix("label=") {
            label = v.parse().map_err(|_| Error::Fasta {
                record: rec.index,
                reason: format!("unknown label {v:?}"),
            })?;
        }
    }
    if rec.seq.is_empty() {
        return Err(Error::Fasta {
            record: rec.index,
            reason: "empty sequence".into(),
        });
    }
    let bad = |e: Error| Error::Fasta {
        record: rec.index,
        reason: e.to_string(),
    };
    if !rec.seq.contains(&b'N') {
        out.push(Read::new(id, rec.seq, label, Source::File).map_err(bad)?);
        return Ok(());
    }
    if policy == NPolicy::Split {
        let fragments = rec.seq.split(|&b| b == b'N').filter(|f| !f.is_empty());
        for (j, frag) in fragments.enumerate() {
            let read = Read::new(format!("{id}_{}", j + 1), frag.to_vec(), label, Source::File);
            out.push(read.map_err(bad)?);
        }
    }
    Ok(())
}

/// Writes one record per read as `>id label=<label>` plus a single
/// unwrapped sequence line.
pub fn write_fasta<W: Write>(mut out: W, reads: &[Read]) -> Result<()> {
    for r in reads {
        writeln!(out, ">{} label={}", r.id(), r.label())?;
        out.write_all(r.bases())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
