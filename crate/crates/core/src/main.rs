use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ndarray::Array2;
use serde_json::json;

use dbgnet::baselines::{kmeans2, logreg_fit, svm_fit, svm_fit_precomputed, svm_grid_search, FeatureKind, FeatureMatrix, LogRegConfig, SvmConfig};
use dbgnet::debruijn::{read_jsonl, write_jsonl, GraphSet};
use dbgnet::deepnet::{DeepClassifier, DeepConfig, TrainSchedule, Variant};
use dbgnet::embed::{graph2vec_embedding, node2vec_graph_embedding, read_embedding, EmbeddingConfig, EmbeddingMethod};
use dbgnet::kernels::{kernel_matrix, read_kernel_matrix, KernelConfig, KernelKind};
use dbgnet::pipeline::{
    ablate_k, ablate_objective, build_dataset, emit_report, references_from_fasta, run_cv, simulate_dataset,
    DatasetSpec, ExperimentConfig, FeatureSpec,
};
use dbgnet::sequence_io::{parse_fasta, write_fasta, Label, Manifest, NPolicy, Read};
use dbgnet::{Error, Result};

#[derive(Parser)]
#[command(name = "dbgnet", version, about = "Read classification from De Bruijn graph representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a balanced host/pathogen read set.
    Simulate {
        /// Reference FASTA; repeat for separate host and pathogen files.
        /// Synthetic references are used when omitted.
        #[arg(long = "ref")]
        references: Vec<PathBuf>,
        #[arg(long, default_value_t = 500)]
        per_class: usize,
        #[arg(long, default_value_t = 150)]
        read_length: usize,
        #[arg(long, default_value_t = 28)]
        q_min: u8,
        #[arg(long, default_value_t = 35)]
        q_max: u8,
        #[arg(long, default_value_t = 200_000)]
        reference_length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One De Bruijn graph per read, as JSON Lines.
    BuildGraphs {
        /// Labeled FASTA or a dataset manifest.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalized all-pairs graph kernel matrix.
    Kernel {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        kind: KernelKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Whole-graph embeddings.
    Embed {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        method: EmbeddingMethod,
        #[arg(long, default_value_t = 128)]
        dim: usize,
        #[arg(long)]
        walks_per_node: Option<usize>,
        #[arg(long)]
        walk_length: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a KMeans, logistic-regression or SVM baseline.
    TrainBaseline {
        /// Embedding (.emb) or kernel matrix (.kmat).
        #[arg(long)]
        features: PathBuf,
        /// Graphs supplying the labels, in feature-row order.
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long)]
        model: String,
        /// Use a kernel-matrix feature file as a precomputed SVM kernel.
        #[arg(long)]
        precomputed: bool,
        #[arg(long)]
        grid_search: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the multi-task network.
    TrainDl {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long, default_value = "small")]
        schedule: String,
        #[arg(long, default_value = "dl")]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated stratified cross-validation of one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run directory; defaults to runs/<name>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy against k for node2vec and SPK.
    AblateK {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DL, NN and no-decoder variants on identical folds.
    AblateObjective {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

/// Reads from a labeled FASTA, or from a manifest in manifest order.
fn load_reads(path: &Path) -> Result<Vec<Read>> {
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: Manifest = serde_json::from_reader(open(path)?)?;
        let fasta = manifest.fasta.as_ref().ok_or_else(|| Error::Format("manifest names no FASTA".into()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let reads = parse_fasta(open(&dir.join(fasta))?, Label::Host, NPolicy::Drop)?;
        let by_id: std::collections::HashMap<&str, &Read> = reads.iter().map(|r| (r.id(), r)).collect();
        return manifest
            .ids
            .iter()
            .zip(&manifest.labels)
            .map(|(id, &label)| {
                let r = by_id.get(id.as_str()).ok_or_else(|| Error::Format(format!("read {id} missing from FASTA")))?;
                Ok((*r).clone().with_label(label))
            })
            .collect();
    }
    parse_fasta(open(path)?, Label::Host, NPolicy::Drop)
}

fn load_graphs(path: &Path) -> Result<GraphSet> {
    let graphs = read_jsonl(open(path)?)?;
    let k = graphs.first().ok_or(Error::Empty("graph file"))?.k;
    GraphSet::new(graphs, k)
}

/// Feature rows plus whether they are kernel values.
fn load_features(path: &Path) -> Result<(Array2<f64>, bool)> {
    if path.extension().is_some_and(|e| e == "kmat") {
        Ok((read_kernel_matrix(open(path)?)?.to_array(), true))
    } else {
        Ok((read_embedding(open(path)?)?.vectors, false))
    }
}

fn load_labeled(features: &Path, graphs: &Path) -> Result<(Array2<f64>, Vec<Label>, bool)> {
    let (rows, is_kernel) = load_features(features)?;
    let labels = load_graphs(graphs)?.labels();
    if rows.nrows() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: rows.nrows() });
    }
    Ok((rows, labels, is_kernel))
}

fn run_dir(cfg: &ExperimentConfig, out: Option<PathBuf>, suffix: &str) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from("runs").join(format!("{}{suffix}", cfg.name)))
}

fn print_summary(dir: &Path) -> Result<()> {
    print!("{}", std::fs::read_to_string(dir.join(dbgnet::pipeline::SUMMARY_CSV))?);
    println!("wrote {}", dir.display());
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { references, per_class, read_length, q_min, q_max, reference_length, seed, out } => {
            let spec = DatasetSpec { per_class, seed, read_length, q_min, q_max, reference_length, ..Default::default() };
            let ds = if references.is_empty() {
                build_dataset(&spec)?
            } else {
                simulate_dataset(&references_from_fasta(&references)?, &spec)?
            };
            std::fs::create_dir_all(&out)?;
            write_fasta(create(&out.join("reads.fasta"))?, &ds.reads)?;
            let manifest = ds.manifest(per_class, seed, Some("reads.fasta".into()));
            serde_json::to_writer_pretty(create(&out.join("manifest.json"))?, &manifest)?;
            println!("{} reads ({} host, {} pathogen) in {}", ds.reads.len(), ds.class_counts()[0], ds.class_counts()[1], out.display());
        }
        Command::BuildGraphs { input, k, out } => {
            let set = GraphSet::from_reads(&load_reads(&input)?, k)?;
            write_jsonl(create(&out)?, &set.graphs)?;
            println!("{} graphs, k = {k}", set.len());
        }
        Command::Kernel { graphs, kind, seed, raw, out } => {
            let set = load_graphs(&graphs)?;
            let km = kernel_matrix(&set, kind, &KernelConfig::default(), seed, !raw)?;
            km.write(create(&out)?)?;
            println!("{kind} matrix {m} x {m}", m = km.m);
        }
        Command::Embed { graphs, method, dim, walks_per_node, walk_length, epochs, seed, out } => {
            let set = load_graphs(&graphs)?;
            let base = EmbeddingConfig::default();
            let cfg = EmbeddingConfig {
                dim,
                walks_per_node: walks_per_node.unwrap_or(base.walks_per_node),
                walk_length: walk_length.unwrap_or(base.walk_length),
                epochs: epochs.unwrap_or(base.epochs),
                ..base
            };
            let emb = match method {
                EmbeddingMethod::Node2vec => node2vec_graph_embedding(&set, &cfg, seed)?,
                EmbeddingMethod::Graph2vec => graph2vec_embedding(&set, &cfg, seed)?,
            };
            emb.write(create(&out)?)?;
            println!("{method} embedding {} x {}", emb.len(), emb.dim());
        }
        Command::TrainBaseline { features, graphs, model, precomputed, grid_search, seed, out } => {
            let (rows, labels, is_kernel) = load_labeled(&features, &graphs)?;
            let kind = if is_kernel { FeatureKind::KernelRow } else { FeatureKind::Embedding };
            let doc = match model.as_str() {
                "kmeans" => json!({ "model": "kmeans", "params": kmeans2(&FeatureMatrix::new(rows, labels, kind)?, seed)? }),
                "logreg" => json!({
                    "model": "logreg",
                    "params": logreg_fit(&FeatureMatrix::new(rows, labels, kind)?, &LogRegConfig::default())?,
                }),
                "svm" if precomputed => {
                    if !is_kernel {
                        return Err(Error::InvalidConfig("--precomputed needs a .kmat feature file".into()));
                    }
                    let cfg = SvmConfig { kernel: "precomputed".into(), ..SvmConfig::default() };
                    json!({ "model": "svm", "config": cfg, "params": svm_fit_precomputed(rows.view(), &labels, &cfg)? })
                }
                "svm" => {
                    let fm = FeatureMatrix::new(rows, labels, kind)?;
                    let (fitted, cfg) = if grid_search {
                        svm_grid_search(&fm, &SvmConfig::default(), seed)?
                    } else {
                        (svm_fit(&fm, &SvmConfig::default())?, SvmConfig::default())
                    };
                    json!({ "model": "svm", "config": cfg, "params": fitted })
                }
                other => return Err(Error::InvalidConfig(format!("unknown baseline {other:?}"))),
            };
            serde_json::to_writer_pretty(create(&out)?, &doc)?;
            println!("{model} written to {}", out.display());
        }
        Command::TrainDl { features, graphs, schedule, variant, seed, out } => {
            let (rows, labels, _) = load_labeled(&features, &graphs)?;
            let classes: Vec<usize> = labels.iter().map(|l| l.index()).collect();
            let cfg = DeepConfig { schedule: TrainSchedule::named(&schedule)?, variant, ..DeepConfig::default() };
            let clf = DeepClassifier::fit(rows.view(), &classes, &cfg, seed)?;
            clf.write(create(&out)?)?;
            if let Some(last) = clf.history.last() {
                println!("final epoch: loss {:.4}, training accuracy {:.2}%", last.total, 100.0 * last.accuracy);
            }
        }
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_cv(&cfg)?;
            let manifest = build_dataset(&cfg.dataset)?.manifest(cfg.dataset.per_class, cfg.dataset.seed, None);
            let dir = run_dir(&cfg, out, "");
            emit_report(&dir, &cfg, &manifest, &[report], &[])?;
            print_summary(&dir)?;
        }
        Command::AblateK { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let reports = ablate_k(&cfg, &[FeatureSpec::Node2vec, FeatureSpec::Spk], &cfg.k_values)?;
            let manifest = build_dataset(&cfg.dataset)?.manifest(cfg.dataset.per_class, cfg.dataset.seed, None);
            let dir = run_dir(&cfg, out, "_ablate_k");
            emit_report(&dir, &cfg, &manifest, &reports, &[])?;
            print_summary(&dir)?;
        }
        Command::AblateObjective { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let ablation = ablate_objective(&cfg)?;
            let manifest = build_dataset(&cfg.dataset)?.manifest(cfg.dataset.per_class, cfg.dataset.seed, None);
            let dir = run_dir(&cfg, out, "_ablate_objective");
            emit_report(&dir, &cfg, &manifest, &ablation.reports, &ablation.deltas)?;
            print_summary(&dir)?;
            for d in &ablation.deltas {
                println!("{} {} - {}: {:+.2} points ({} wins, {} losses)", d.features, d.variant, d.baseline, d.mean_delta, d.wins, d.losses);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
