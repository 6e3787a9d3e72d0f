mod ablation;
mod config;
mod cv;
mod features;
mod folds;
mod report;

pub use ablation::{ablate_k, ablate_objective, paired_delta, ObjectiveAblation, PairedDelta, OBJECTIVE_VARIANTS};
pub use config::{build_dataset, dataset_references, references_from_fasta, simulate_dataset, ClassifierKind, DatasetSpec, ExperimentConfig, FeatureSpec};
pub use cv::{classify, cv_prepared, cv_splits, run_cv, run_cv_multi, CvReport, FoldReport, SkipReport, Summary, SD_REPORT_THRESHOLD};
pub use features::{prepare, FoldFeatures, Prepared};
pub use folds::{complement, stratified_folds};
pub use report::{
    emit_report, write_folds_csv, write_plot_csv, write_summary_csv, CONFIG_JSON, FOLDS_CSV, MANIFEST_JSON, PLOT_CSV,
    SUMMARY_CSV, SUMMARY_JSON,
};
