use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{build_dataset, ClassifierKind, ExperimentConfig, FeatureSpec};
use super::features::{prepare, FoldFeatures, Prepared};
use super::folds::{complement, stratified_folds};
use crate::baselines::{
    kmeans2, logreg_fit, svm_fit, svm_fit_precomputed, svm_grid_search, FeatureKind, FeatureMatrix, Standardizer,
};
use crate::deepnet::{DeepClassifier, DeepConfig};
use crate::error::{Error, Result};
use crate::seed::{derive, tag};
use crate::sequence_io::{Dataset, Label};

/// Test-fold metrics. Confusion rows are true classes, columns predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub iteration: usize,
    pub fold: usize,
    pub accuracy: f64,
    pub precision: [f64; 2],
    pub recall: [f64; 2],
    pub confusion: [[usize; 2]; 2],
}

impl FoldReport {
    pub fn from_predictions(iteration: usize, fold: usize, truth: &[usize], pred: &[usize]) -> Self {
        let mut confusion = [[0usize; 2]; 2];
        for (&t, &p) in truth.iter().zip(pred) {
            confusion[t][p] += 1;
        }
        let n = truth.len().max(1) as f64;
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let mut precision = [0.0; 2];
        let mut recall = [0.0; 2];
        for c in 0..2 {
            precision[c] = ratio(confusion[c][c], confusion[0][c] + confusion[1][c]);
            recall[c] = ratio(confusion[c][c], confusion[c][0] + confusion[c][1]);
        }
        FoldReport {
            iteration,
            fold,
            accuracy: (confusion[0][0] + confusion[1][1]) as f64 / n,
            precision,
            recall,
            confusion,
        }
    }

    pub fn test_size(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }
}

/// Aggregate accuracy in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Mean over every fold of every iteration.
    pub mean: f64,
    /// Sample standard deviation of the per-iteration means.
    pub sd: f64,
    pub iteration_means: Vec<f64>,
}

/// Below this many percentage points the sd is left out of printed tables.
pub const SD_REPORT_THRESHOLD: f64 = 0.01;

impl Summary {
    pub fn from_folds(folds: &[FoldReport]) -> Option<Self> {
        if folds.is_empty() {
            return None;
        }
        let mean = 100.0 * folds.iter().map(|f| f.accuracy).sum::<f64>() / folds.len() as f64;
        let iterations = folds.iter().map(|f| f.iteration).max().unwrap() + 1;
        let mut sums = vec![(0.0, 0usize); iterations];
        for f in folds {
            sums[f.iteration].0 += f.accuracy;
            sums[f.iteration].1 += 1;
        }
        let iteration_means: Vec<f64> =
            sums.iter().filter(|s| s.1 > 0).map(|&(s, n)| 100.0 * s / n as f64).collect();
        let sd = if iteration_means.len() < 2 {
            0.0
        } else {
            let mu = iteration_means.iter().sum::<f64>() / iteration_means.len() as f64;
            let ss: f64 = iteration_means.iter().map(|m| (m - mu).powi(2)).sum();
            (ss / (iteration_means.len() - 1) as f64).sqrt()
        };
        Some(Summary { mean, sd, iteration_means })
    }

    /// `"73.49 ± 0.69"`, or just the mean when the sd is negligible.
    pub fn display(&self) -> String {
        if self.sd > SD_REPORT_THRESHOLD {
            format!("{:.2} ± {:.2}", self.mean, self.sd)
        } else {
            format!("{:.2}", self.mean)
        }
    }
}

/// Why a configuration produced no folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipReport {
    pub reason: String,
    pub graph_i: usize,
    pub graph_j: usize,
    pub product_nodes: usize,
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub name: String,
    pub features: FeatureSpec,
    pub classifier: ClassifierKind,
    pub k: usize,
    pub graphs: usize,
    pub folds: Vec<FoldReport>,
    pub summary: Option<Summary>,
    pub skipped: Option<SkipReport>,
}

impl CvReport {
    pub fn mean(&self) -> Option<f64> {
        self.summary.as_ref().map(|s| s.mean)
    }
}

fn matrix(rows: Array2<f64>, labels: &[Label], kind: FeatureKind) -> Result<FeatureMatrix> {
    FeatureMatrix::new(rows, labels.to_vec(), kind)
}

fn standardized(ff: &FoldFeatures) -> Result<(Array2<f64>, Array2<f64>)> {
    let s = Standardizer::fit(ff.train.view())?;
    Ok((s.apply(ff.train.view())?, s.apply(ff.test.view())?))
}

/// Fits one classifier on the training rows and predicts the test rows.
pub fn classify(
    kind: ClassifierKind,
    ff: &FoldFeatures,
    train_labels: &[Label],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<usize>> {
    let fk = if ff.is_kernel { FeatureKind::KernelRow } else { FeatureKind::Embedding };
    match kind {
        ClassifierKind::Kmeans => {
            let model = kmeans2(&matrix(ff.train.clone(), train_labels, fk)?, seed)?;
            Ok(model.predict(ff.test.view()))
        }
        ClassifierKind::Logreg => {
            let (tr, te) = standardized(ff)?;
            Ok(logreg_fit(&matrix(tr, train_labels, fk)?, &cfg.logreg)?.predict(te.view()))
        }
        ClassifierKind::Svm => {
            if cfg.svm.kernel == "precomputed" {
                if !ff.is_kernel {
                    return Err(Error::InvalidConfig("precomputed SVM needs kernel features".into()));
                }
                let model = svm_fit_precomputed(ff.train.view(), train_labels, &cfg.svm)?;
                return Ok(model.predict_precomputed(ff.test.view()));
            }
            let (tr, te) = standardized(ff)?;
            let fm = matrix(tr, train_labels, fk)?;
            let model = if cfg.svm.grid_search { svm_grid_search(&fm, &cfg.svm, seed)?.0 } else { svm_fit(&fm, &cfg.svm)? };
            model.predict(te.view())
        }
        ClassifierKind::Dl | ClassifierKind::Nn | ClassifierKind::NoDecoder => {
            let deep = DeepConfig { variant: kind.variant().unwrap(), ..cfg.deep.clone() };
            let classes: Vec<usize> = train_labels.iter().map(|l| l.index()).collect();
            DeepClassifier::fit(ff.train.view(), &classes, &deep, seed)?.predict(ff.test.view())
        }
    }
}

/// Every (iteration, fold) split: test indices and sorted training indices.
pub fn cv_splits(classes: &[usize], cfg: &ExperimentConfig) -> Result<Vec<(usize, usize, Vec<usize>, Vec<usize>)>> {
    let mut jobs = Vec::new();
    for it in 0..cfg.cv_iterations {
        for (f, test) in stratified_folds(classes, cfg.cv_folds, cfg.split_seed(it))?.into_iter().enumerate() {
            let train = complement(classes.len(), &test);
            jobs.push((it, f, train, test));
        }
    }
    Ok(jobs)
}

/// Cross-validates several classifiers on one prepared feature space.
/// Every classifier sees the same splits, the same fold features and the
/// same model seed, so their fold accuracies are paired.
pub fn cv_prepared(
    dataset: &Dataset,
    prepared: &Prepared,
    cfg: &ExperimentConfig,
    classifiers: &[ClassifierKind],
) -> Result<Vec<Vec<FoldReport>>> {
    let labels = dataset.labels();
    let classes: Vec<usize> = labels.iter().map(|l| l.index()).collect();
    if prepared.len() != classes.len() {
        return Err(Error::DimensionMismatch { expected: classes.len(), got: prepared.len() });
    }
    let jobs = cv_splits(&classes, cfg)?;
    let per_job: Vec<Vec<FoldReport>> = jobs
        .par_iter()
        .map(|(it, f, train, test)| {
            let seed = cfg.fold_seed(*it, *f);
            let ff = prepared.fold(train, test, cfg, derive(seed, &[tag("features")]))?;
            let train_labels: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
            let truth: Vec<usize> = test.iter().map(|&i| classes[i]).collect();
            classifiers
                .iter()
                .map(|&c| {
                    let pred = classify(c, &ff, &train_labels, cfg, derive(seed, &[tag("model")]))?;
                    Ok(FoldReport::from_predictions(*it, *f, &truth, &pred))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..classifiers.len()).map(|c| per_job.iter().map(|r| r[c].clone()).collect()).collect())
}

/// One report per classifier for `features` at `k`. A random-walk kernel
/// whose product graphs exceed the cap yields skipped reports instead of
/// an error.
pub fn run_cv_multi(
    dataset: &Dataset,
    cfg: &ExperimentConfig,
    features: FeatureSpec,
    k: usize,
    classifiers: &[ClassifierKind],
) -> Result<Vec<CvReport>> {
    let report = |classifier, folds: Vec<FoldReport>, skipped| CvReport {
        name: cfg.name.clone(),
        features,
        classifier,
        k,
        graphs: dataset.reads.len(),
        summary: Summary::from_folds(&folds),
        folds,
        skipped,
    };
    let prepared = match prepare(dataset, features, k, cfg) {
        Ok(p) => p,
        Err(Error::ProductTooLarge { i, j, product_nodes, cap }) => {
            let skip = SkipReport { reason: "product_too_large".into(), graph_i: i, graph_j: j, product_nodes, cap };
            return Ok(classifiers.iter().map(|&c| report(c, Vec::new(), Some(skip.clone()))).collect());
        }
        Err(e) => return Err(e),
    };
    let folds = cv_prepared(dataset, &prepared, cfg, classifiers)?;
    Ok(classifiers.iter().zip(folds).map(|(&c, f)| report(c, f, None)).collect())
}

/// The configured experiment end to end.
pub fn run_cv(cfg: &ExperimentConfig) -> Result<CvReport> {
    cfg.validate()?;
    let dataset = build_dataset(&cfg.dataset)?;
    Ok(run_cv_multi(&dataset, cfg, cfg.features, cfg.k, &[cfg.classifier])?.remove(0))
}
