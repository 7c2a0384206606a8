//! `qcnn` — train and evaluate the QCNN model family on binary
//! MNIST/Fashion-MNIST tasks.

mod config;
mod verify;

use clap::{Args, Parser, Subcommand};
use config::ConfigDraft;
use qcnn_core::error::{Error, Result};
use qcnn_core::experiment::{
    run_experiment_with_progress, CellKey, ExperimentReport, SeedArtifact, SeedOutcome,
};
use qcnn_core::report::emit_report;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "qcnn",
    about = "Statevector QCNN training and evaluation on binary image pairs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment cell (dataset, pair, model, ansatz) over its seeds.
    Run(RunArgs),
    /// Run a grid of cells and emit one combined report.
    Suite(SuiteArgs),
    /// Quick property and oracle checks; exits nonzero on any failure.
    Verify(VerifyArgs),
    /// Re-aggregate report files from per-seed artifacts already on disk.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Flat key=value config file; flags given here override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset: mnist or fashion.
    #[arg(long)]
    dataset: Option<String>,
    /// Directory holding the IDX files (or mnist/ and fashion/ subdirs).
    #[arg(long = "dataset-dir")]
    dataset_dir: Option<PathBuf>,
    /// Class pair, e.g. 0v1 or tshirt_vs_trouser.
    #[arg(long)]
    pair: Option<String>,
    /// conventional | pca-reencoded | ae-amplitude | joint | ensemble.
    #[arg(long)]
    model: Option<String>,
    /// Convolution ansatz: 1 (SO(4)) or 2 (SU(4)).
    #[arg(long)]
    ansatz: Option<String>,
    /// Comma-separated seed list, e.g. 1,2,3,4,5.
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory for reports and per-seed artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache directory for PCA/autoencoder fits.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Gradient mode: shift or fdiff.
    #[arg(long = "grad-mode")]
    grad_mode: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long = "batch-size")]
    batch_size: Option<usize>,
    #[arg(long = "learning-rate")]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    /// Upper end of the feature-angle interval (default π).
    #[arg(long = "scale-max")]
    scale_max: Option<f64>,
    /// Validate config and data, train nothing.
    #[arg(long = "dry-run", default_value_t = false)]
    dry_run: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(flatten)]
    common: CommonFlags,
    /// Restrict to these models (comma-separated); default: all five.
    #[arg(long)]
    models: Option<String>,
    /// Restrict to these pairs (comma-separated, per chosen dataset).
    #[arg(long)]
    pairs: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Directory with the IDX files, to also check published pair counts.
    #[arg(long = "dataset-dir")]
    dataset_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory containing per-seed artifact JSON files.
    #[arg(long)]
    artifacts: PathBuf,
    /// Output directory for the aggregated report files.
    #[arg(long)]
    out: PathBuf,
}

impl CommonFlags {
    fn draft(&self) -> Result<ConfigDraft> {
        let base = match &self.config {
            Some(path) => ConfigDraft::from_file(path)?,
            None => ConfigDraft::default(),
        };
        let flags = ConfigDraft {
            dataset: self.dataset.clone(),
            data_dir: self.dataset_dir.clone(),
            pair: self.pair.clone(),
            model: self.model.clone(),
            ansatz: self.ansatz.clone(),
            seeds: self.seeds.clone(),
            iterations: self.iterations,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            grad_mode: self.grad_mode.clone(),
            fd_step: None,
            scale_max: self.scale_max,
            shared_layers: None,
            out_dir: self.out.clone(),
            cache_dir: self.cache.clone(),
            dry_run: if self.dry_run { Some(true) } else { None },
        };
        Ok(base.overlay(flags))
    }
}

fn print_seed(outcome: &SeedOutcome) {
    match (&outcome.metrics, &outcome.failure) {
        (Some(m), _) => println!(
            "  seed {:>3}: accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}  ({:.1}s)",
            outcome.seed,
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            outcome.wall_ms as f64 / 1000.0
        ),
        (None, Some(why)) => println!("  seed {:>3}: FAILED — {why}", outcome.seed),
        _ => {}
    }
}

fn print_cell(report: &ExperimentReport) {
    // Reports rebuilt from artifacts carry no split sizes.
    if report.train_count > 0 {
        println!(
            "cell {}  train {} / test {}  [{}]",
            report.key, report.train_count, report.test_count, report.positive_class
        );
    } else {
        println!("cell {}  [{}]", report.key, report.positive_class);
    }
    if let Some(mean) = &report.mean {
        println!(
            "  mean over {} seeds: accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}{}",
            mean.seeds_used,
            mean.accuracy,
            mean.precision,
            mean.recall,
            mean.f1,
            if report.partial { "  (PARTIAL)" } else { "" }
        );
    } else if !report.outcomes.is_empty() {
        println!("  no seed succeeded");
    }
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let config = args.common.draft()?.resolve()?;
    println!("running cell {}", config.key());
    let report = run_experiment_with_progress(&config, print_seed)?;
    print_cell(&report);
    if let Some(out_dir) = &config.out_dir {
        let files = emit_report(std::slice::from_ref(&report), out_dir)?;
        println!(
            "wrote {}, {}, {}",
            files.results_csv.display(),
            files.summary_json.display(),
            files.plot_csv.display()
        );
    }
    Ok(if report.partial { 1 } else { 0 })
}

fn cmd_suite(args: SuiteArgs) -> Result<i32> {
    let base = args.common.draft()?;

    let datasets: Vec<String> = match &base.dataset {
        Some(d) => vec![d.clone()],
        None => vec!["mnist".into(), "fashion".into()],
    };
    let models: Vec<String> = match &args.models {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => vec![
            "conventional".into(),
            "pca-reencoded".into(),
            "ae-amplitude".into(),
            "joint".into(),
            "ensemble".into(),
        ],
    };
    let ansatzes: Vec<String> = match &base.ansatz {
        Some(a) => vec![a.clone()],
        None => vec!["1".into(), "2".into()],
    };

    let mut reports = Vec::new();
    let mut any_partial = false;
    for dataset in &datasets {
        let pairs: Vec<String> = match &args.pairs {
            Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
            None => match dataset.as_str() {
                "mnist" => vec!["0v1".into(), "1v2".into(), "2v3".into()],
                _ => vec![
                    "tshirt_vs_trouser".into(),
                    "trouser_vs_dress".into(),
                    "sandal_vs_boot".into(),
                ],
            },
        };
        for pair in &pairs {
            for model in &models {
                for ansatz in &ansatzes {
                    let cell = ConfigDraft {
                        dataset: Some(dataset.clone()),
                        pair: Some(pair.clone()),
                        model: Some(model.clone()),
                        ansatz: Some(ansatz.clone()),
                        ..ConfigDraft::default()
                    };
                    let config = base.clone().overlay(cell).resolve()?;
                    println!("running cell {}", config.key());
                    let report = run_experiment_with_progress(&config, print_seed)?;
                    print_cell(&report);
                    any_partial |= report.partial;
                    reports.push(report);
                    // Re-emit after every cell so long suites checkpoint.
                    if let Some(out_dir) = &config.out_dir {
                        emit_report(&reports, out_dir)?;
                    }
                }
            }
        }
    }
    println!("suite complete: {} cells", reports.len());
    Ok(if any_partial { 1 } else { 0 })
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let outcome = verify::run(args.dataset_dir.as_deref())?;
    println!(
        "verify: {} passed, {} failed",
        outcome.passed, outcome.failed
    );
    Ok(if outcome.failed > 0 { 1 } else { 0 })
}

fn cmd_report(args: ReportArgs) -> Result<i32> {
    let mut by_cell: BTreeMap<CellKey, Vec<SeedArtifact>> = BTreeMap::new();
    let entries = std::fs::read_dir(&args.artifacts)
        .map_err(|e| Error::io(args.artifacts.display().to_string(), e))?;
    for entry in entries {
        let path = entry
            .map_err(|e| Error::io(args.artifacts.display().to_string(), e))?
            .path();
        if path.extension().is_some_and(|e| e == "json")
            && path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.contains("_seed"))
        {
            match SeedArtifact::load(&path) {
                Ok(artifact) => by_cell
                    .entry(artifact.key.clone())
                    .or_default()
                    .push(artifact),
                Err(e) => eprintln!("skipping {}: {e}", path.display()),
            }
        }
    }
    if by_cell.is_empty() {
        return Err(Error::Degenerate(format!(
            "no seed artifacts found under {}",
            args.artifacts.display()
        )));
    }
    let reports: Vec<ExperimentReport> = by_cell
        .into_iter()
        .map(|(key, artifacts)| ExperimentReport::from_artifacts(key, &artifacts))
        .collect::<Result<_>>()?;
    for report in &reports {
        print_cell(report);
    }
    let files = emit_report(&reports, &args.out)?;
    println!(
        "wrote {}, {}, {}",
        files.results_csv.display(),
        files.summary_json.display(),
        files.plot_csv.display()
    );
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Suite(args) => cmd_suite(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
    }
}
