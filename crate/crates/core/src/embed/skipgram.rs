use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;

use super::EmbeddingConfig;
use crate::error::{Error, Result};
use crate::seed::{rng_from, tag, Rng};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Negative-sampling loss `-log σ(u·v_pos) - Σ log σ(-u·v_neg)`.
pub fn sgns_loss(u: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    let dot = |v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    -sigmoid(dot(positive)).ln() - negatives.iter().map(|v| sigmoid(-dot(v)).ln()).sum::<f64>()
}

/// One logistic term of the negative-sampling objective with target `label`
/// (1 for the observed context, 0 for a noise word). Applies the SGD step
/// to `v` in place and accumulates the step for `u` into `u_step`; with
/// `lr = 1` both steps equal the negative gradient. Returns the term's loss.
pub fn sgns_update(u: &[f64], v: &mut [f64], label: f64, lr: f64, u_step: &mut [f64]) -> f64 {
    let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    let s = sigmoid(dot);
    let g = (label - s) * lr;
    for ((step, vi), ui) in u_step.iter_mut().zip(v.iter_mut()).zip(u) {
        *step += g * *vi;
        *vi += g * ui;
    }
    if label > 0.5 {
        -s.max(f64::MIN_POSITIVE).ln()
    } else {
        -(1.0 - s).max(f64::MIN_POSITIVE).ln()
    }
}

/// Trained skip-gram model over a token vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipGram {
    pub dim: usize,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    /// Token occurrences in the training corpus.
    pub counts: Vec<u64>,
    /// Mean pair loss per epoch.
    pub losses: Vec<f64>,
}

impl SkipGram {
    pub fn vocab_len(&self) -> usize {
        self.counts.len()
    }

    pub fn vector(&self, id: usize) -> &[f64] {
        &self.input[id * self.dim..(id + 1) * self.dim]
    }

    pub fn seen(&self, id: usize) -> bool {
        self.counts[id] > 0
    }
}

pub(crate) fn noise_distribution(counts: &[u64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75))).map_err(|_| Error::Empty("training corpus"))
}

pub(crate) fn uniform_init(rng: &mut Rng, len: usize, dim: usize) -> Vec<f64> {
    let scale = 1.0 / dim as f64;
    (0..len).map(|_| (rng.gen::<f64>() - 0.5) * scale).collect()
}

/// Learning rate after `done` of `total` tokens.
pub(crate) fn decayed(lr: f64, done: usize, total: usize) -> f64 {
    lr * (1.0 - done as f64 / total.max(1) as f64).max(1e-4)
}

/// Skip-gram with negative sampling over token sentences. Context windows
/// are shrunk by a random amount per centre token; noise words follow the
/// unigram distribution raised to 0.75. Single-threaded and seeded.
pub fn skipgram_train(sentences: &[Vec<usize>], vocab_size: usize, cfg: &EmbeddingConfig, seed: u64) -> Result<SkipGram> {
    cfg.validate()?;
    if vocab_size == 0 {
        return Err(Error::Empty("vocabulary"));
    }
    let dim = cfg.dim;
    let mut counts = vec![0u64; vocab_size];
    for &t in sentences.iter().flatten() {
        if t >= vocab_size {
            return Err(Error::DimensionMismatch { expected: vocab_size, got: t + 1 });
        }
        counts[t] += 1;
    }
    let noise = noise_distribution(&counts)?;
    let mut rng = rng_from(seed, &[tag("skipgram")]);
    let mut input = uniform_init(&mut rng, vocab_size * dim, dim);
    let mut output = vec![0.0; vocab_size * dim];
    let tokens: usize = sentences.iter().map(Vec::len).sum();
    let total = tokens * cfg.epochs;
    let mut done = 0;
    let mut step = vec![0.0; dim];
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let (mut loss, mut pairs) = (0.0, 0usize);
        for sent in sentences {
            for (i, &centre) in sent.iter().enumerate() {
                let alpha = decayed(cfg.lr, done, total);
                done += 1;
                let span = cfg.window - rng.gen_range(0..cfg.window);
                let lo = i.saturating_sub(span);
                let hi = (i + span).min(sent.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let ctx = sent[j];
                    step.fill(0.0);
                    let u = &input[centre * dim..(centre + 1) * dim];
                    loss += sgns_update(u, &mut output[ctx * dim..(ctx + 1) * dim], 1.0, alpha, &mut step);
                    for _ in 0..cfg.negative_samples {
                        let t = noise.sample(&mut rng);
                        if t == ctx {
                            continue;
                        }
                        loss += sgns_update(u, &mut output[t * dim..(t + 1) * dim], 0.0, alpha, &mut step);
                    }
                    for (a, s) in input[centre * dim..(centre + 1) * dim].iter_mut().zip(&step) {
                        *a += s;
                    }
                    pairs += 1;
                }
            }
        }
        losses.push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
    }
    Ok(SkipGram { dim, input, output, counts, losses })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) == 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_pair_gradient_matches_finite_differences() {
        let u = vec![0.3, -0.2, 0.5];
        let v = vec![-0.1, 0.4, 0.25];
        let mut v_new = v.clone();
        let mut u_step = vec![0.0; 3];
        let loss = sgns_update(&u, &mut v_new, 1.0, 1.0, &mut u_step);
        assert!((loss - sgns_loss(&u, &v, &[])).abs() < 1e-12);
        let h = 1e-6;
        for d in 0..3 {
            let (mut up, mut um) = (u.clone(), u.clone());
            up[d] += h;
            um[d] -= h;
            let fd = (sgns_loss(&up, &v, &[]) - sgns_loss(&um, &v, &[])) / (2.0 * h);
            assert!((-u_step[d] - fd).abs() <= 1e-5 * fd.abs().max(1e-8), "u[{d}]");
            let (mut vp, mut vm) = (v.clone(), v.clone());
            vp[d] += h;
            vm[d] -= h;
            let fd = (sgns_loss(&u, &vp, &[]) - sgns_loss(&u, &vm, &[])) / (2.0 * h);
            assert!((-(v_new[d] - v[d]) - fd).abs() <= 1e-5 * fd.abs().max(1e-8), "v[{d}]");
        }
    }

    #[test]
    fn repeated_pair_drives_score_up() {
        let sentences = vec![vec![0, 1]; 50];
        let cfg = EmbeddingConfig { dim: 8, window: 10, epochs: 40, negative_samples: 0, lr: 0.1, ..Default::default() };
        let m = skipgram_train(&sentences, 2, &cfg, 1).unwrap();
        let score = sigmoid(dot(m.vector(0), &m.output[8..16]));
        assert!(score > 0.95, "{score}");
    }

    #[test]
    fn loss_decreases_and_training_is_seeded() {
        let sentences: Vec<Vec<usize>> = (0..40).map(|s| (0..30).map(|i| (s + i * 3) % 17).collect()).collect();
        let cfg = EmbeddingConfig { dim: 16, window: 4, epochs: 6, ..Default::default() };
        let a = skipgram_train(&sentences, 17, &cfg, 5).unwrap();
        let b = skipgram_train(&sentences, 17, &cfg, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.losses.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{:?}", a.losses);
        assert_ne!(a.input, skipgram_train(&sentences, 17, &cfg, 6).unwrap().input);
    }

    #[test]
    fn unseen_tokens_keep_zero_count_and_empty_corpus_errors() {
        let cfg = EmbeddingConfig { dim: 4, epochs: 1, ..Default::default() };
        let m = skipgram_train(&[vec![0, 2, 0]], 4, &cfg, 0).unwrap();
        assert_eq!(m.counts, vec![2, 0, 1, 0]);
        assert!(!m.seen(1) && m.seen(2));
        assert!(skipgram_train(&[], 4, &cfg, 0).is_err());
        assert!(skipgram_train(&[vec![0]], 0, &cfg, 0).is_err());
        assert!(skipgram_train(&[vec![7]], 4, &cfg, 0).is_err());
    }
}
