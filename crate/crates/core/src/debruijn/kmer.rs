use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sequence_io::Read;

/// Largest supported k; k-mers are packed two bits per base into a `u64`.
pub const MAX_K: usize = 32;

/// A 2-bit packed k-mer (`A=0, C=1, G=2, T=3`, first base most significant).
/// The length is carried by the enclosing sequence or graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Kmer(pub u64);

fn code(b: u8) -> Option<u64> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

impl Kmer {
    pub fn encode(bases: &[u8]) -> Option<Kmer> {
        if bases.is_empty() || bases.len() > MAX_K {
            return None;
        }
        bases
            .iter()
            .try_fold(0u64, |acc, &b| Some((acc << 2) | code(b)?))
            .map(Kmer)
    }

    pub fn decode(self, k: usize) -> String {
        (0..k)
            .rev()
            .map(|i| b"ACGT"[((self.0 >> (2 * i)) & 3) as usize] as char)
            .collect()
    }

    /// The last `k - 1` bases.
    pub fn suffix(self, k: usize) -> u64 {
        self.0 & ((1u64 << (2 * (k - 1))) - 1)
    }

    /// The first `k - 1` bases.
    pub fn prefix(self) -> u64 {
        self.0 >> 2
    }
}

fn check_k(k: usize) -> Result<()> {
    if (2..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("k must lie in 2..={MAX_K}, got {k}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KmerSequence {
    pub k: usize,
    pub tokens: Vec<Kmer>,
}

impl KmerSequence {
    pub fn as_strings(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.decode(self.k)).collect()
    }
}

/// Sliding window of width `k` with step 1: `N - k + 1` tokens.
pub fn extract_kmers(read: &Read, k: usize) -> Result<KmerSequence> {
    check_k(k)?;
    let bases = read.bases();
    if bases.len() < k {
        return Err(Error::SequenceTooShort {
            len: bases.len(),
            required: k,
        });
    }
    let mask = if k == MAX_K { u64::MAX } else { (1u64 << (2 * k)) - 1 };
    let mut tokens = Vec::with_capacity(bases.len() - k + 1);
    let mut acc = 0u64;
    for (i, &b) in bases.iter().enumerate() {
        // Read guarantees the ACGT alphabet.
        acc = ((acc << 2) | code(b).expect("validated base")) & mask;
        if i + 1 >= k {
            tokens.push(Kmer(acc));
        }
    }
    Ok(KmerSequence { k, tokens })
}

/// Dense ids for k-mer labels, contiguous from 0 in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    k: usize,
    kmers: Vec<Kmer>,
    ids: HashMap<Kmer, usize>,
}

impl Vocabulary {
    pub fn new(k: usize) -> Self {
        Vocabulary {
            k,
            kmers: Vec::new(),
            ids: HashMap::new(),
        }
    }

    /// All `4^k` k-mers in lexicographic order, so that id = packed code.
    pub fn complete(k: usize) -> Result<Self> {
        check_k(k)?;
        if k > 12 {
            return Err(Error::InvalidConfig(format!("complete vocabulary for k={k} is too large")));
        }
        let mut v = Vocabulary::new(k);
        for c in 0..(1u64 << (2 * k)) {
            v.insert(Kmer(c));
        }
        Ok(v)
    }

    /// Returns the id of `kmer`, assigning the next free id if unseen.
    pub fn insert(&mut self, kmer: Kmer) -> usize {
        let next = self.kmers.len();
        *self.ids.entry(kmer).or_insert_with(|| {
            self.kmers.push(kmer);
            next
        })
    }

    pub fn id(&self, kmer: Kmer) -> Option<usize> {
        self.ids.get(&kmer).copied()
    }

    pub fn kmer(&self, id: usize) -> Kmer {
        self.kmers[id]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.kmers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kmers.is_empty()
    }
}

/// Normalized k-mer counts: component `j` is the number of occurrences of
/// vocabulary k-mer `j` divided by `N - k + 1`. K-mers missing from the
/// vocabulary are counted in the denominator only.
pub fn kmer_frequency_vector(read: &Read, k: usize, vocabulary: &Vocabulary) -> Result<Vec<f64>> {
    if vocabulary.k() != k {
        return Err(Error::InvalidConfig(format!(
            "vocabulary holds {}-mers, asked for k={k}",
            vocabulary.k()
        )));
    }
    let seq = extract_kmers(read, k)?;
    let mut v = vec![0.0; vocabulary.len()];
    let total = seq.tokens.len() as f64;
    for t in &seq.tokens {
        if let Some(id) = vocabulary.id(*t) {
            v[id] += 1.0;
        }
    }
    v.iter_mut().for_each(|x| *x /= total);
    Ok(v)
}
