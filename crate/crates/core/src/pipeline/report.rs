use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ablation::PairedDelta;
use super::config::ExperimentConfig;
use super::cv::CvReport;
use crate::error::{Error, Result};
use crate::sequence_io::Manifest;

pub const FOLDS_CSV: &str = "folds.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const PLOT_CSV: &str = "plot.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const CONFIG_JSON: &str = "config.json";

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn two(v: f64) -> String {
    format!("{v:.2}")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// One row per fold of every report, accuracies in percent.
pub fn write_folds_csv(path: &Path, reports: &[CvReport]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "features", "classifier", "k", "iteration", "fold", "test_size", "accuracy", "precision_host",
        "recall_host", "precision_pathogen", "recall_pathogen", "tn", "fp", "fn", "tp",
    ])?;
    for r in reports {
        for f in &r.folds {
            let c = f.confusion;
            w.write_record([
                r.features.name().to_string(),
                r.classifier.name().to_string(),
                r.k.to_string(),
                f.iteration.to_string(),
                f.fold.to_string(),
                f.test_size().to_string(),
                pct(f.accuracy),
                pct(f.precision[0]),
                pct(f.recall[0]),
                pct(f.precision[1]),
                pct(f.recall[1]),
                c[0][0].to_string(),
                c[0][1].to_string(),
                c[1][0].to_string(),
                c[1][1].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Table view: one row per report, a printed "mean ± sd" cell and the
/// skip reason where there is one.
pub fn write_summary_csv(path: &Path, reports: &[CvReport]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["features", "classifier", "k", "folds", "mean", "sd", "reported", "status"])?;
    for r in reports {
        let (mean, sd, shown) = match &r.summary {
            Some(s) => (two(s.mean), two(s.sd), s.display()),
            None => (String::new(), String::new(), "-".to_string()),
        };
        let status = match &r.skipped {
            Some(s) => s.reason.clone(),
            None => "ok".into(),
        };
        w.write_record([
            r.features.name().to_string(),
            r.classifier.name().to_string(),
            r.k.to_string(),
            r.folds.len().to_string(),
            mean,
            sd,
            shown,
            status,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Accuracy against k, one row per (k, features, classifier), for plotting.
pub fn write_plot_csv(path: &Path, reports: &[CvReport]) -> Result<()> {
    let mut rows: Vec<&CvReport> = reports.iter().filter(|r| r.summary.is_some()).collect();
    rows.sort_by_key(|r| (r.k, r.features.name(), r.classifier.name()));
    let mut w = csv_writer(path)?;
    w.write_record(["k", "features", "classifier", "mean", "sd"])?;
    for r in rows {
        let s = r.summary.as_ref().unwrap();
        w.write_record([r.k.to_string(), r.features.name().into(), r.classifier.name().into(), two(s.mean), two(s.sd)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    name: &'a str,
    reports: &'a [CvReport],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    deltas: &'a [PairedDelta],
}

/// Writes the run directory: resolved config, dataset manifest, per-fold
/// CSV, summary CSV and JSON, and plot data. Output depends only on the
/// arguments, so re-emitting the same reports reproduces every byte.
pub fn emit_report(
    dir: &Path,
    cfg: &ExperimentConfig,
    manifest: &Manifest,
    reports: &[CvReport],
    deltas: &[PairedDelta],
) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::Empty("reports"));
    }
    fs::create_dir_all(dir)?;
    let path = |name: &str| dir.join(name);
    write_json(&path(CONFIG_JSON), cfg)?;
    write_json(&path(MANIFEST_JSON), manifest)?;
    write_folds_csv(&path(FOLDS_CSV), reports)?;
    write_summary_csv(&path(SUMMARY_CSV), reports)?;
    write_plot_csv(&path(PLOT_CSV), reports)?;
    write_json(&path(SUMMARY_JSON), &SummaryDoc { name: &cfg.name, reports, deltas })?;
    Ok([CONFIG_JSON, MANIFEST_JSON, FOLDS_CSV, SUMMARY_CSV, PLOT_CSV, SUMMARY_JSON].iter().map(|n| path(n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::config::{ClassifierKind, FeatureSpec};
    use crate::pipeline::cv::{FoldReport, Summary};
    use crate::sequence_io::Label;

    fn one_fold() -> CvReport {
        let folds = vec![FoldReport::from_predictions(0, 0, &[0, 1, 1], &[0, 1, 0])];
        CvReport {
            name: "t".into(),
            features: FeatureSpec::Spk,
            classifier: ClassifierKind::Svm,
            k: 3,
            graphs: 3,
            summary: Summary::from_folds(&folds),
            folds,
            skipped: None,
        }
    }

    fn manifest() -> Manifest {
        Manifest { name: "t".into(), per_class: 1, seed: 0, fasta: None, ids: vec!["a".into()], labels: vec![Label::Host] }
    }

    #[test]
    fn one_fold_gives_header_and_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::default();
        emit_report(dir.path(), &cfg, &manifest(), &[one_fold()], &[]).unwrap();
        let text = fs::read_to_string(dir.path().join(FOLDS_CSV)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "spk,svm,3,0,0,3,66.67,50.00,100.00,100.00,50.00,1,0,1,1");
        let summary = fs::read_to_string(dir.path().join(SUMMARY_CSV)).unwrap();
        assert!(summary.lines().nth(1).unwrap().starts_with("spk,svm,3,1,66.67,0.00,66.67,ok"));
    }

    #[test]
    fn json_keeps_raw_precision_and_reemits_identically() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::default();
        let files = emit_report(a.path(), &cfg, &manifest(), &[one_fold()], &[]).unwrap();
        emit_report(b.path(), &cfg, &manifest(), &[one_fold()], &[]).unwrap();
        for f in files {
            let name = f.file_name().unwrap();
            assert_eq!(fs::read(&f).unwrap(), fs::read(b.path().join(name)).unwrap());
        }
        let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join(SUMMARY_JSON)).unwrap()).unwrap();
        assert_eq!(doc["reports"][0]["folds"][0]["accuracy"].as_f64().unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn empty_reports_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_report(dir.path(), &ExperimentConfig::default(), &manifest(), &[], &[]).is_err());
    }
}
