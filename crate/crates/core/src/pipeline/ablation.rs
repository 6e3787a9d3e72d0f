use serde::{Deserialize, Serialize};

use super::config::{build_dataset, ClassifierKind, ExperimentConfig, FeatureSpec};
use super::cv::{run_cv_multi, CvReport};
use crate::error::{Error, Result};

/// Accuracy against k for each feature kind, all with the configured
/// classifier. The dataset is simulated once and reused for every k.
pub fn ablate_k(cfg: &ExperimentConfig, features: &[FeatureSpec], k_values: &[usize]) -> Result<Vec<CvReport>> {
    cfg.validate()?;
    if let Some(&k) = k_values.iter().find(|&&k| k > cfg.dataset.read_length) {
        return Err(Error::SequenceTooShort { len: cfg.dataset.read_length, required: k });
    }
    let dataset = build_dataset(&cfg.dataset)?;
    let mut out = Vec::new();
    for &k in k_values {
        for &f in features {
            out.extend(run_cv_multi(&dataset, cfg, f, k, &[cfg.classifier])?);
        }
    }
    Ok(out)
}

pub const OBJECTIVE_VARIANTS: [ClassifierKind; 3] = [ClassifierKind::Dl, ClassifierKind::Nn, ClassifierKind::NoDecoder];

/// Paired accuracy difference between two variants over identical folds,
/// in percentage points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDelta {
    pub features: FeatureSpec,
    pub k: usize,
    pub baseline: ClassifierKind,
    pub variant: ClassifierKind,
    /// Mean of `variant − baseline` over folds.
    pub mean_delta: f64,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
}

pub fn paired_delta(baseline: &CvReport, variant: &CvReport) -> Result<PairedDelta> {
    if baseline.folds.len() != variant.folds.len() || baseline.folds.is_empty() {
        return Err(Error::DimensionMismatch { expected: baseline.folds.len(), got: variant.folds.len() });
    }
    let (mut wins, mut losses, mut ties, mut sum) = (0, 0, 0, 0.0);
    for (b, v) in baseline.folds.iter().zip(&variant.folds) {
        if (b.iteration, b.fold) != (v.iteration, v.fold) {
            return Err(Error::InvalidConfig("reports are not paired fold by fold".into()));
        }
        let d = v.accuracy - b.accuracy;
        sum += d;
        match d.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => wins += 1,
            Some(std::cmp::Ordering::Less) => losses += 1,
            _ => ties += 1,
        }
    }
    Ok(PairedDelta {
        features: baseline.features,
        k: baseline.k,
        baseline: baseline.classifier,
        variant: variant.classifier,
        mean_delta: 100.0 * sum / baseline.folds.len() as f64,
        wins,
        losses,
        ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveAblation {
    pub reports: Vec<CvReport>,
    /// DL − NN and DL − no-decoder per feature kind.
    pub deltas: Vec<PairedDelta>,
}

/// The three training variants on identical folds, features and seeds,
/// for every configured feature kind.
pub fn ablate_objective(cfg: &ExperimentConfig) -> Result<ObjectiveAblation> {
    cfg.validate()?;
    let dataset = build_dataset(&cfg.dataset)?;
    let mut reports = Vec::new();
    let mut deltas = Vec::new();
    for &f in &cfg.ablation_features {
        let r = run_cv_multi(&dataset, cfg, f, cfg.k, &OBJECTIVE_VARIANTS)?;
        if r[0].skipped.is_none() {
            deltas.push(paired_delta(&r[1], &r[0])?);
            deltas.push(paired_delta(&r[2], &r[0])?);
        }
        reports.extend(r);
    }
    Ok(ObjectiveAblation { reports, deltas })
}
