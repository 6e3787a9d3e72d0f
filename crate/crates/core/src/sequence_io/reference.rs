//! Synthetic reference genomes drawn from first-order Markov chains.
//!
//! A profile is a base composition plus a table of dinucleotide odds ratios
//! (observed / expected frequency). The transition `a -> b` has weight
//! `freq(b) * odds(ab)`, normalised per row. The two bundled profiles differ
//! mainly in CpG depletion, which is strong in mammalian hosts and absent in
//! most bacterial pathogens, while GC content stays close.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Label, Read, Source};
use crate::error::{Error, Result};
use crate::seed;

const BASES: [u8; 4] = [b'A', b'C', b'G', b'T'];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovProfile {
    /// Base frequencies in `A, C, G, T` order.
    pub composition: [f64; 4],
    /// Dinucleotide odds ratios, `odds[a][b]` for the pair `ab`.
    pub odds: [[f64; 4]; 4],
}

impl MarkovProfile {
    /// Mammal-like: ~42% GC, CpG odds ratio ~0.23, mild TpA depletion.
    pub fn host_like() -> Self {
        let gc = 0.42;
        let mut odds = [[1.0; 4]; 4];
        odds[1][2] = 0.23; // CG
        odds[3][0] = 0.75; // TA
        odds[1][0] = 1.22; // CA
        odds[3][2] = 1.22; // TG
        odds[0][0] = 1.08; // AA
        odds[3][3] = 1.08; // TT
        odds[2][1] = 1.02; // GC
        MarkovProfile {
            composition: [(1.0 - gc) / 2.0, gc / 2.0, gc / 2.0, (1.0 - gc) / 2.0],
            odds,
        }
    }

    /// Gamma-proteobacterium-like: ~41% GC, no CpG depletion, GpC and
    /// homopolymer pairs slightly enriched.
    pub fn pathogen_like() -> Self {
        let gc = 0.41;
        let mut odds = [[1.0; 4]; 4];
        odds[1][2] = 0.95; // CG
        odds[3][0] = 0.70; // TA
        odds[2][1] = 1.22; // GC
        odds[0][0] = 1.15; // AA
        odds[3][3] = 1.15; // TT
        odds[1][1] = 1.05; // CC
        odds[2][2] = 1.05; // GG
        MarkovProfile {
            composition: [(1.0 - gc) / 2.0, gc / 2.0, gc / 2.0, (1.0 - gc) / 2.0],
            odds,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.composition.iter().all(|&p| p > 0.0 && p.is_finite())
            && self.odds.iter().flatten().all(|&o| o > 0.0 && o.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "Markov profile needs positive finite weights".into(),
            ))
        }
    }

    /// Row-normalised transition matrix.
    pub fn transitions(&self) -> [[f64; 4]; 4] {
        let mut t = [[0.0; 4]; 4];
        for a in 0..4 {
            let row: Vec<f64> = (0..4).map(|b| self.composition[b] * self.odds[a][b]).collect();
            let z: f64 = row.iter().sum();
            for b in 0..4 {
                t[a][b] = row[b] / z;
            }
        }
        t
    }
}

fn draw(weights: &[f64; 4], rng: &mut seed::Rng) -> usize {
    let u: f64 = rng.gen::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    3
}

/// Generates a reference sequence of `length` bases.
pub fn synthetic_reference(
    id: &str,
    label: Label,
    profile: &MarkovProfile,
    length: usize,
    seed: u64,
) -> Result<Read> {
    profile.validate()?;
    if length == 0 {
        return Err(Error::InvalidConfig("reference length must be positive".into()));
    }
    let trans = profile.transitions();
    let mut rng = seed::rng_from(seed, &[seed::tag("reference"), label.index() as u64]);
    let mut bases = Vec::with_capacity(length);
    let mut cur = draw(&profile.composition, &mut rng);
    bases.push(BASES[cur]);
    for _ in 1..length {
        cur = draw(&trans[cur], &mut rng);
        bases.push(BASES[cur]);
    }
    Read::new(id, bases, label, Source::Simulated)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dinuc_odds(seq: &[u8], a: u8, b: u8) -> f64 {
        let n = seq.len() as f64;
        let fa = seq.iter().filter(|&&x| x == a).count() as f64 / n;
        let fb = seq.iter().filter(|&&x| x == b).count() as f64 / n;
        let fab = seq.windows(2).filter(|w| w[0] == a && w[1] == b).count() as f64 / (n - 1.0);
        fab / (fa * fb)
    }

    #[test]
    fn profiles_differ_in_cpg_not_gc() {
        let host = synthetic_reference("h", Label::Host, &MarkovProfile::host_like(), 200_000, 1).unwrap();
        let path =
            synthetic_reference("p", Label::Pathogen, &MarkovProfile::pathogen_like(), 200_000, 1).unwrap();
        let gc = |r: &Read| {
            r.bases().iter().filter(|&&b| b == b'G' || b == b'C').count() as f64 / r.len() as f64
        };
        assert!((gc(&host) - gc(&path)).abs() < 0.04, "{} vs {}", gc(&host), gc(&path));
        let h = dinuc_odds(host.bases(), b'C', b'G');
        let p = dinuc_odds(path.bases(), b'C', b'G');
        assert!(h < 0.4 && p > 0.7, "CpG odds host {h}, pathogen {p}");
    }

    #[test]
    fn generation_is_seeded() {
        let p = MarkovProfile::host_like();
        let a = synthetic_reference("h", Label::Host, &p, 500, 9).unwrap();
        let b = synthetic_reference("h", Label::Host, &p, 500, 9).unwrap();
        let c = synthetic_reference("h", Label::Host, &p, 500, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.bases(), c.bases());
    }

    #[test]
    fn transitions_are_stochastic() {
        for row in MarkovProfile::pathogen_like().transitions() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
