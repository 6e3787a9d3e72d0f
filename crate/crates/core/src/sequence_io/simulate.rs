//! Substitution-only short-read simulator.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Label, Read, Source};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub read_length: usize,
    pub q_min: u8,
    pub q_max: u8,
    pub reads_per_class: usize,
    /// Pathogen reads drawn per host read. Host references always yield
    /// `reads_per_class` reads.
    pub pathogen_ratio: f64,
    pub rng_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            read_length: 150,
            q_min: 28,
            q_max: 35,
            reads_per_class: 500,
            pathogen_ratio: 1.0,
            rng_seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.q_min && self.q_min <= self.q_max && self.q_max <= 60) {
            return Err(Error::InvalidConfig(format!(
                "need 2 <= q_min <= q_max <= 60, got {}..{}",
                self.q_min, self.q_max
            )));
        }
        if self.read_length == 0 || self.reads_per_class == 0 {
            return Err(Error::InvalidConfig(
                "read_length and reads_per_class must be positive".into(),
            ));
        }
        if !(self.pathogen_ratio > 0.0 && self.pathogen_ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "pathogen_ratio must lie in (0, 1], got {}",
                self.pathogen_ratio
            )));
        }
        Ok(())
    }

    fn read_count(&self, label: Label) -> usize {
        match label {
            Label::Host => self.reads_per_class,
            Label::Pathogen => ((self.reads_per_class as f64 * self.pathogen_ratio).round() as usize).max(1),
        }
    }
}

/// Phred error probability `10^(-q/10)`.
pub fn phred_error_probability(q: f64) -> f64 {
    10f64.powf(-q / 10.0)
}

const BASES: [u8; 4] = [b'A', b'C', b'G', b'T'];

/// Copies `reference[start..start+len]`, substituting each base with
/// probability `error_prob(rng)` by one of the three other bases.
fn sample_window(
    reference: &[u8],
    start: usize,
    len: usize,
    rng: &mut seed::Rng,
    mut error_prob: impl FnMut(&mut seed::Rng) -> f64,
) -> Vec<u8> {
    reference[start..start + len]
        .iter()
        .map(|&b| {
            let p = error_prob(rng);
            if rng.gen::<f64>() < p {
                let others: Vec<u8> = BASES.iter().copied().filter(|&x| x != b).collect();
                others[rng.gen_range(0..3)]
            } else {
                b
            }
        })
        .collect()
}

/// Draws reads uniformly along `reference`; each base gets an integer
/// quality drawn uniformly from `[q_min, q_max]` and is substituted with the
/// matching Phred probability. Read `i` uses its own derived stream, so the
/// output is a pure function of `(reference, cfg)`.
pub fn simulate_reads(reference: &Read, cfg: &SimulationConfig) -> Result<Vec<Read>> {
    cfg.validate()?;
    if reference.len() < cfg.read_length {
        return Err(Error::SequenceTooShort {
            len: reference.len(),
            required: cfg.read_length,
        });
    }
    let label = reference.label();
    let span = reference.len() - cfg.read_length;
    let width = cfg.read_count(label).to_string().len();
    (0..cfg.read_count(label))
        .map(|i| {
            let mut rng = seed::rng_from(
                cfg.rng_seed,
                &[seed::tag("simulate"), label.index() as u64, i as u64],
            );
            let start = rng.gen_range(0..=span);
            let bases = sample_window(reference.bases(), start, cfg.read_length, &mut rng, |r| {
                phred_error_probability(r.gen_range(cfg.q_min..=cfg.q_max) as f64)
            });
            Read::new(
                format!("{}_{:0width$}", reference.id(), i),
                bases,
                label,
                Source::Simulated,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence_io::{synthetic_reference, MarkovProfile};

    fn reference(len: usize) -> Read {
        synthetic_reference("ref", Label::Pathogen, &MarkovProfile::pathogen_like(), len, 3).unwrap()
    }

    #[test]
    fn phred_identity() {
        assert_eq!(phred_error_probability(10.0), 0.1);
        assert!((phred_error_probability(60.0) - 1e-6).abs() < 1e-18);
        assert!((phred_error_probability(28.0) - 10f64.powf(-2.8)).abs() < 1e-18);
    }

    #[test]
    fn zero_error_gives_exact_substrings() {
        let r = reference(2_000);
        let mut rng = seed::rng(5);
        for start in [0, 17, 1_900] {
            let w = sample_window(r.bases(), start, 100, &mut rng, |_| 0.0);
            assert_eq!(&w[..], &r.bases()[start..start + 100]);
        }
    }

    #[test]
    fn q60_reads_match_reference_windows() {
        let r = reference(5_000);
        let cfg = SimulationConfig {
            read_length: 100,
            q_min: 60,
            q_max: 60,
            reads_per_class: 20,
            rng_seed: 11,
            ..Default::default()
        };
        let text = String::from_utf8(r.bases().to_vec()).unwrap();
        for read in simulate_reads(&r, &cfg).unwrap() {
            assert!(text.contains(std::str::from_utf8(read.bases()).unwrap()));
            assert_eq!(read.label(), Label::Pathogen);
        }
    }

    #[test]
    fn error_rate_tracks_phred() {
        let r = reference(20_000);
        let mut rng = seed::rng(1);
        let mut diffs = 0usize;
        let mut total = 0usize;
        for start in (0..19_000).step_by(100) {
            let w = sample_window(r.bases(), start, 100, &mut rng, |_| 0.1);
            diffs += w.iter().zip(&r.bases()[start..]).filter(|(a, b)| a != b).count();
            total += 100;
        }
        let rate = diffs as f64 / total as f64;
        assert!((rate - 0.1).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn same_seed_same_reads() {
        let r = reference(3_000);
        let cfg = SimulationConfig {
            reads_per_class: 30,
            rng_seed: 42,
            ..Default::default()
        };
        let a = simulate_reads(&r, &cfg).unwrap();
        let b = simulate_reads(&r, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_reads(&r, &SimulationConfig { rng_seed: 43, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn short_reference_and_bad_quality_rejected() {
        let r = reference(50);
        assert!(matches!(
            simulate_reads(&r, &SimulationConfig::default()),
            Err(Error::SequenceTooShort { len: 50, required: 150 })
        ));
        let bad = SimulationConfig {
            q_min: 40,
            q_max: 30,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimulationConfig {
            q_max: 61,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn pathogen_ratio_scales_pathogen_count_only() {
        let cfg = SimulationConfig {
            read_length: 50,
            reads_per_class: 40,
            pathogen_ratio: 0.25,
            ..Default::default()
        };
        assert_eq!(simulate_reads(&reference(500), &cfg).unwrap().len(), 10);
        let host = reference(500).with_label(Label::Host);
        assert_eq!(simulate_reads(&host, &cfg).unwrap().len(), 40);
    }
}
