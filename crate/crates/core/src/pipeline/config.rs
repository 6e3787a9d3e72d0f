use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{LogRegConfig, SvmConfig};
use crate::deepnet::{DeepConfig, Variant};
use crate::embed::EmbeddingConfig;
use crate::error::{Error, Result};
use crate::kernels::{KernelConfig, KernelKind};
use crate::seed::{derive, tag};
use crate::sequence_io::{
    parse_fasta, sample_balanced, simulate_reads, synthetic_reference, Dataset, Label, MarkovProfile, NPolicy, Read,
    SimulationConfig,
};

/// Where reads come from: simulated from two synthetic references, or
/// from one FASTA reference per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub per_class: usize,
    pub seed: u64,
    pub read_length: usize,
    pub q_min: u8,
    pub q_max: u8,
    /// Length of each synthetic reference.
    pub reference_length: usize,
    pub host_fasta: Option<PathBuf>,
    pub pathogen_fasta: Option<PathBuf>,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            per_class: 500,
            seed: 0,
            read_length: 150,
            q_min: 28,
            q_max: 35,
            reference_length: 200_000,
            host_fasta: None,
            pathogen_fasta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSpec {
    KmerFreq,
    Node2vec,
    Graph2vec,
    Spk,
    Wlk,
    Gsk,
    Rwk,
}

impl FeatureSpec {
    pub const ALL: [FeatureSpec; 7] = [
        FeatureSpec::KmerFreq,
        FeatureSpec::Node2vec,
        FeatureSpec::Graph2vec,
        FeatureSpec::Spk,
        FeatureSpec::Wlk,
        FeatureSpec::Gsk,
        FeatureSpec::Rwk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureSpec::KmerFreq => "kmer_freq",
            FeatureSpec::Node2vec => "node2vec",
            FeatureSpec::Graph2vec => "graph2vec",
            FeatureSpec::Spk => "spk",
            FeatureSpec::Wlk => "wlk",
            FeatureSpec::Gsk => "gsk",
            FeatureSpec::Rwk => "rwk",
        }
    }

    pub fn kernel(self) -> Option<KernelKind> {
        match self {
            FeatureSpec::Spk => Some(KernelKind::Spk),
            FeatureSpec::Wlk => Some(KernelKind::Wlk),
            FeatureSpec::Gsk => Some(KernelKind::Gsk),
            FeatureSpec::Rwk => Some(KernelKind::Rwk),
            _ => None,
        }
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSpec::ALL
            .into_iter()
            .find(|f| f.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown feature kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Kmeans,
    Logreg,
    Svm,
    Nn,
    Dl,
    NoDecoder,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Kmeans,
        ClassifierKind::Logreg,
        ClassifierKind::Svm,
        ClassifierKind::Nn,
        ClassifierKind::Dl,
        ClassifierKind::NoDecoder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Kmeans => "kmeans",
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Nn => "nn",
            ClassifierKind::Dl => "dl",
            ClassifierKind::NoDecoder => "no_decoder",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            ClassifierKind::Dl => Some(Variant::Dl),
            ClassifierKind::Nn => Some(Variant::Nn),
            ClassifierKind::NoDecoder => Some(Variant::NoDecoder),
            _ => None,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown classifier {s:?}")))
    }
}

/// One experiment, loadable from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Master seed for folds, embeddings and model initialization.
    pub seed: u64,
    pub dataset: DatasetSpec,
    pub k: usize,
    pub features: FeatureSpec,
    pub classifier: ClassifierKind,
    pub cv_folds: usize,
    pub cv_iterations: usize,
    /// k values visited by the k ablation.
    pub k_values: Vec<usize>,
    /// Feature kinds compared by the objective ablation.
    pub ablation_features: Vec<FeatureSpec>,
    pub embedding: EmbeddingConfig,
    pub kernel: KernelConfig,
    pub deep: DeepConfig,
    pub logreg: LogRegConfig,
    pub svm: SvmConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "ds500".into(),
            seed: 0,
            dataset: DatasetSpec::default(),
            k: 6,
            features: FeatureSpec::Node2vec,
            classifier: ClassifierKind::Dl,
            cv_folds: 10,
            cv_iterations: 10,
            k_values: vec![2, 3, 4, 5, 6],
            ablation_features: vec![FeatureSpec::Node2vec, FeatureSpec::Graph2vec, FeatureSpec::Spk],
            embedding: EmbeddingConfig::default(),
            kernel: KernelConfig::default(),
            deep: DeepConfig::default(),
            logreg: LogRegConfig::default(),
            svm: SvmConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads `.toml` or `.json` by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)?,
            _ => toml::from_str(&text)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k < 2 || self.k > crate::debruijn::MAX_K {
            return bad(format!("k must lie in 2..={}, got {}", crate::debruijn::MAX_K, self.k));
        }
        for &k in &self.k_values {
            if k < 2 || k > self.dataset.read_length {
                return bad(format!("k ablation value {k} outside 2..=read_length"));
            }
        }
        if self.k > self.dataset.read_length {
            return bad("k exceeds the read length".into());
        }
        if self.cv_folds < 2 || self.cv_iterations == 0 {
            return bad("need at least two folds and one iteration".into());
        }
        if self.dataset.per_class == 0 {
            return bad("per_class must be positive".into());
        }
        for p in [&self.dataset.host_fasta, &self.dataset.pathogen_fasta].into_iter().flatten() {
            if !p.exists() {
                return bad(format!("reference {} does not exist", p.display()));
            }
        }
        if self.dataset.host_fasta.is_some() != self.dataset.pathogen_fasta.is_some() {
            return bad("host_fasta and pathogen_fasta must be given together".into());
        }
        self.embedding.validate()?;
        self.kernel.validate()?;
        self.deep.schedule.validate()?;
        self.deep.loss.validate()
    }

    /// Seed of one component of one fold.
    pub fn fold_seed(&self, iteration: usize, fold: usize) -> u64 {
        derive(self.seed, &[tag("fold"), iteration as u64, fold as u64])
    }

    /// Seed of the fold split of one iteration.
    pub fn split_seed(&self, iteration: usize) -> u64 {
        derive(self.seed, &[tag("split"), iteration as u64])
    }
}

/// First host and first pathogen record across `paths`. Records without a
/// `label=` tag count as host in the first file and pathogen in later ones.
pub fn references_from_fasta(paths: &[PathBuf]) -> Result<[Read; 2]> {
    let mut found: [Option<Read>; 2] = [None, None];
    for (n, path) in paths.iter().enumerate() {
        let default = if n == 0 { Label::Host } else { Label::Pathogen };
        for r in parse_fasta(BufReader::new(File::open(path)?), default, NPolicy::Drop)? {
            let slot = &mut found[r.label().index()];
            if slot.is_none() {
                *slot = Some(r);
            }
        }
    }
    match found {
        [Some(h), Some(p)] => Ok([h, p]),
        _ => Err(Error::InvalidConfig("references must include a host and a pathogen record".into())),
    }
}

/// Reads simulated from the two references, `per_class` per label.
pub fn simulate_dataset(references: &[Read; 2], spec: &DatasetSpec) -> Result<Dataset> {
    let sim = SimulationConfig {
        read_length: spec.read_length,
        q_min: spec.q_min,
        q_max: spec.q_max,
        reads_per_class: spec.per_class,
        pathogen_ratio: 1.0,
        rng_seed: spec.seed,
    };
    let host = simulate_reads(&references[0].clone().with_label(Label::Host), &sim)?;
    let pathogen = simulate_reads(&references[1].clone().with_label(Label::Pathogen), &sim)?;
    let mut ds = sample_balanced(&host, &pathogen, spec.per_class, spec.seed)?;
    ds.name = format!("simulated_{}x2", spec.per_class);
    Ok(ds)
}

/// The configured references, or two synthetic ones with host-like and
/// pathogen-like composition.
pub fn dataset_references(spec: &DatasetSpec) -> Result<[Read; 2]> {
    match (&spec.host_fasta, &spec.pathogen_fasta) {
        (Some(h), Some(p)) => references_from_fasta(&[h.clone(), p.clone()]),
        _ => Ok([
            synthetic_reference("host_ref", Label::Host, &MarkovProfile::host_like(), spec.reference_length, spec.seed)?,
            synthetic_reference(
                "pathogen_ref",
                Label::Pathogen,
                &MarkovProfile::pathogen_like(),
                spec.reference_length,
                spec.seed,
            )?,
        ]),
    }
}

pub fn build_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    simulate_dataset(&dataset_references(spec)?, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: ExperimentConfig = toml::from_str("k = 3\nfeatures = \"spk\"\n[dataset]\nper_class = 20\n").unwrap();
        assert_eq!((partial.k, partial.features, partial.dataset.per_class), (3, FeatureSpec::Spk, 20));
        assert_eq!(partial.cv_folds, 10);
        assert!(toml::from_str::<ExperimentConfig>("bogus = 1").is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        assert!(ExperimentConfig::default().validate().is_ok());
        assert!(ExperimentConfig { k: 1, ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { cv_folds: 1, ..Default::default() }.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.dataset.host_fasta = Some("/nonexistent.fa".into());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn names_parse() {
        for f in FeatureSpec::ALL {
            assert_eq!(f.name().parse::<FeatureSpec>().unwrap(), f);
        }
        for c in ClassifierKind::ALL {
            assert_eq!(c.name().parse::<ClassifierKind>().unwrap(), c);
        }
    }

    #[test]
    fn dataset_is_balanced_and_seeded() {
        let spec = DatasetSpec { per_class: 30, reference_length: 5_000, ..Default::default() };
        let ds = build_dataset(&spec).unwrap();
        assert_eq!(ds.class_counts(), [30, 30]);
        assert!(ds.reads.iter().all(|r| r.len() == 150));
        assert_eq!(ds.reads, build_dataset(&spec).unwrap().reads);
    }

    #[test]
    fn references_from_tagged_fasta() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("refs.fa");
        std::fs::write(&path, ">a label=pathogen\nACGTACGT\n>b\nTTTTGGGG\n>c label=pathogen\nAAAA\n").unwrap();
        let [h, p] = references_from_fasta(&[path.clone()]).unwrap();
        assert_eq!((h.id(), p.id()), ("b", "a"));
        std::fs::write(&path, ">b\nTTTTGGGG\n").unwrap();
        assert!(references_from_fasta(&[path]).is_err());
    }

    #[test]
    fn fold_seeds_are_distinct() {
        let cfg = ExperimentConfig::default();
        assert_ne!(cfg.fold_seed(0, 1), cfg.fold_seed(1, 0));
        assert_ne!(cfg.split_seed(0), cfg.split_seed(1));
    }
}
