//! Reconstruction oracle: a read's De Bruijn graph, with multiplicities,
//! is an Eulerian trail, so walking every edge once must spell a sequence
//! with exactly the read's k-mer multiset.

use std::collections::HashMap;

use dbgnet::debruijn::DeBruijnGraph;
use dbgnet::sequence_io::{Label, Read, Source};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_read(rng: &mut ChaCha8Rng, len: usize, alphabet: &[u8]) -> Read {
    let bases = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
    Read::new("r", bases, Label::Host, Source::Simulated).unwrap()
}

/// Hierholzer over the multigraph, starting where out-degree exceeds
/// in-degree (or anywhere when balanced). Returns the node sequence.
fn eulerian_trail(g: &DeBruijnGraph) -> Vec<usize> {
    let n = g.nodes.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut balance = vec![0i64; n];
    for e in &g.edges {
        for _ in 0..e.multiplicity {
            out[e.from as usize].push(e.to as usize);
        }
        balance[e.from as usize] += e.multiplicity as i64;
        balance[e.to as usize] -= e.multiplicity as i64;
    }
    let start = (0..n).find(|&v| balance[v] == 1).unwrap_or(0);
    let mut stack = vec![start];
    let mut trail = Vec::new();
    while let Some(&v) = stack.last() {
        if let Some(w) = out[v].pop() {
            stack.push(w);
        } else {
            trail.push(stack.pop().unwrap());
        }
    }
    trail.reverse();
    trail
}

fn kmer_counts(s: &[u8], k: usize) -> HashMap<Vec<u8>, usize> {
    let mut m = HashMap::new();
    for w in s.windows(k) {
        *m.entry(w.to_vec()).or_insert(0) += 1;
    }
    m
}

fn check(read: &Read, k: usize) -> String {
    let g = DeBruijnGraph::from_read(read, k).unwrap();
    let n = read.len();
    assert!(g.nodes.len() <= n - k + 1);
    assert_eq!(g.total_multiplicity() as usize, n - k);
    let trail = eulerian_trail(&g);
    assert_eq!(trail.len(), n - k + 1, "trail must use every edge once");
    let mut spelled = g.nodes[trail[0]].decode(k).into_bytes();
    for &v in &trail[1..] {
        spelled.push(*g.nodes[v].decode(k).as_bytes().last().unwrap());
    }
    assert_eq!(kmer_counts(&spelled, k), kmer_counts(read.bases(), k));
    String::from_utf8(spelled).unwrap()
}

#[test]
fn unique_kmers_reconstruct_the_read_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let read = random_read(&mut rng, 150, b"ACGT");
        let spelled = check(&read, 16);
        let g = DeBruijnGraph::from_read(&read, 16).unwrap();
        if g.nodes.len() == 150 - 16 + 1 {
            assert_eq!(spelled.as_bytes(), read.bases());
        }
    }
}

#[test]
fn repeated_kmers_preserve_the_multiset() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in [2, 3, 6] {
        for _ in 0..200 {
            check(&random_read(&mut rng, 150, b"ACGT"), k);
        }
    }
    // low-complexity reads force many repeats and self-loops
    for _ in 0..100 {
        check(&random_read(&mut rng, 80, b"AC"), 4);
    }
    check(&Read::new("poly", vec![b'A'; 40], Label::Host, Source::Simulated).unwrap(), 5);
}
