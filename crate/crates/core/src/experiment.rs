//! Experiment orchestration: configuration, per-seed pipelines, and
//! artifact persistence.
//!
//! One experiment cell is (dataset, pair, model, ansatz) run over a list of
//! seeds. Every seed repeats the full pipeline — fit the feature extractors
//! on the training split, train, evaluate on the test split — and the whole
//! cell is reproducible bit-for-bit from (config, seeds, data files).
//! Label 1 (the second-named class of the pair) is the positive class in
//! every report.

use crate::autoencoder::{ae_encode, ae_train, AeConfig, AutoencoderModel};
use crate::data::{fashion_class, filter_pair, idx_paths, load_idx, BinaryPairSet, DatasetId};
use crate::encoding::FeatureVector;
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, Metrics};
use crate::model::{
    build_circuit, ensemble_predict, CompiledModel, ConvAnsatz, ModelKind, ModelSpec,
    PredictionVector, Sample,
};
use crate::pca::{pca_fit, pca_transform, PcaModel};
use crate::scaler::FeatureScaler;
use crate::train::{train, TrainConfig, TrainTrace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

pub const PCA_COMPONENTS: usize = 8;

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub dataset: DatasetId,
    pub data_dir: PathBuf,
    pub pair: (u8, u8),
    pub model: ModelKind,
    pub ansatz: ConvAnsatz,
    pub shared_layers: bool,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    /// Upper end of the angle-scaling interval [0, scale_max].
    pub scale_max: f64,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub dry_run: bool,
}

impl ExperimentConfig {
    pub fn new(
        dataset: DatasetId,
        data_dir: PathBuf,
        pair: (u8, u8),
        model: ModelKind,
        ansatz: ConvAnsatz,
    ) -> Self {
        ExperimentConfig {
            dataset,
            data_dir,
            pair,
            model,
            ansatz,
            shared_layers: true,
            train: TrainConfig::default(),
            seeds: vec![1, 2, 3, 4, 5],
            scale_max: PI,
            out_dir: None,
            cache_dir: None,
            dry_run: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.pair.0 == self.pair.1 {
            return Err(Error::Config("pair needs two distinct classes".into()));
        }
        if self.scale_max <= 0.0 {
            return Err(Error::Config("scale_max must be positive".into()));
        }
        if self.train.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.train.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.train.momentum) {
            return Err(Error::Config("momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn key(&self) -> CellKey {
        CellKey {
            dataset: self.dataset.to_string(),
            pair: pair_name(self.dataset, self.pair.0, self.pair.1),
            model: self.model.to_string(),
            ansatz: self.ansatz.to_string(),
        }
    }
}

/// Identity of one experiment cell in reports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub dataset: String,
    pub pair: String,
    pub model: String,
    pub ansatz: String,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.dataset, self.pair, self.model, self.ansatz
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub metrics: Option<Metrics>,
    pub final_train_loss: Option<f64>,
    pub wall_ms: u64,
    /// Why the seed was aborted, when it was.
    pub failure: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub seeds_used: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub key: CellKey,
    pub seeds: Vec<u64>,
    pub outcomes: Vec<SeedOutcome>,
    pub mean: Option<MeanMetrics>,
    /// True when at least one seed aborted.
    pub partial: bool,
    pub positive_class: String,
    pub train_count: usize,
    pub test_count: usize,
}

/// Mean over the successful seeds, summed in ascending seed order so the
/// result is invariant to the order seeds were listed in.
fn mean_metrics(outcomes: &[SeedOutcome]) -> Option<MeanMetrics> {
    let mut scored: Vec<(&u64, &Metrics)> = outcomes
        .iter()
        .filter_map(|o| o.metrics.as_ref().map(|m| (&o.seed, m)))
        .collect();
    if scored.is_empty() {
        return None;
    }
    scored.sort_by_key(|(seed, _)| **seed);
    let n = scored.len() as f64;
    let sum = |f: fn(&Metrics) -> f64| scored.iter().map(|(_, m)| f(m)).sum::<f64>() / n;
    Some(MeanMetrics {
        accuracy: sum(|m| m.accuracy),
        precision: sum(|m| m.precision),
        recall: sum(|m| m.recall),
        f1: sum(|m| m.f1),
        seeds_used: scored.len(),
    })
}

/// Human-readable pair name: digit pairs as `0v1`, fashion pairs by class
/// name.
pub fn pair_name(dataset: DatasetId, a: u8, b: u8) -> String {
    match dataset {
        DatasetId::Mnist => format!("{a}v{b}"),
        DatasetId::FashionMnist => {
            let name = |c: u8| match c {
                fashion_class::T_SHIRT => "tshirt".to_string(),
                fashion_class::TROUSER => "trouser".to_string(),
                fashion_class::DRESS => "dress".to_string(),
                fashion_class::SANDAL => "sandal".to_string(),
                fashion_class::ANKLE_BOOT => "boot".to_string(),
                other => other.to_string(),
            };
            format!("{}_vs_{}", name(a), name(b))
        }
    }
}

/// Parse `--pair` syntax: `AvB` with class indices, or a named fashion
/// pair such as `tshirt_vs_trouser`.
pub fn parse_pair(dataset: DatasetId, s: &str) -> Result<(u8, u8)> {
    let named = match (dataset, s) {
        (DatasetId::FashionMnist, "tshirt_vs_trouser") => {
            Some((fashion_class::T_SHIRT, fashion_class::TROUSER))
        }
        (DatasetId::FashionMnist, "trouser_vs_dress") => {
            Some((fashion_class::TROUSER, fashion_class::DRESS))
        }
        (DatasetId::FashionMnist, "sandal_vs_boot") => {
            Some((fashion_class::SANDAL, fashion_class::ANKLE_BOOT))
        }
        _ => None,
    };
    if let Some(pair) = named {
        return Ok(pair);
    }
    let parts: Vec<&str> = s.split('v').collect();
    if parts.len() == 2 {
        if let (Ok(a), Ok(b)) = (parts[0].parse::<u8>(), parts[1].parse::<u8>()) {
            return Ok((a, b));
        }
    }
    Err(Error::Config(format!(
        "cannot parse pair '{s}' (expected e.g. 0v1 or tshirt_vs_trouser)"
    )))
}

/// Features prepared for one (pair, seed) pipeline.
struct PreparedFeatures {
    train: Vec<Sample>,
    test: Vec<Sample>,
    scaler: Option<FeatureScaler>,
}

fn needs_pca(kind: ModelKind) -> bool {
    matches!(
        kind,
        ModelKind::Conventional | ModelKind::PcaReencoded | ModelKind::Joint | ModelKind::Ensemble
    )
}

fn needs_ae(kind: ModelKind) -> bool {
    matches!(
        kind,
        ModelKind::AeAmplitude | ModelKind::Joint | ModelKind::Ensemble
    )
}

fn fit_pca_cached(config: &ExperimentConfig, train_set: &BinaryPairSet) -> Result<PcaModel> {
    let cache_path = config.cache_dir.as_ref().map(|dir| {
        dir.join(format!(
            "{}_{}v{}_pca{PCA_COMPONENTS}.bin",
            config.dataset, config.pair.0, config.pair.1
        ))
    });
    if let Some(path) = &cache_path {
        if path.exists() {
            return PcaModel::load(path);
        }
    }
    let model = pca_fit(&train_set.images, PCA_COMPONENTS)?;
    if let Some(path) = &cache_path {
        std::fs::create_dir_all(path.parent().unwrap())
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        model.save(path)?;
    }
    Ok(model)
}

fn fit_ae_cached(
    config: &ExperimentConfig,
    train_set: &BinaryPairSet,
    seed: u64,
) -> Result<AutoencoderModel> {
    let cache_path = config.cache_dir.as_ref().map(|dir| {
        dir.join(format!(
            "{}_{}v{}_ae16_seed{seed}.bin",
            config.dataset, config.pair.0, config.pair.1
        ))
    });
    if let Some(path) = &cache_path {
        if path.exists() {
            return AutoencoderModel::load(path);
        }
    }
    let (model, _) = ae_train(&train_set.images, seed, &AeConfig::default())?;
    if let Some(path) = &cache_path {
        std::fs::create_dir_all(path.parent().unwrap())
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        model.save(path)?;
    }
    Ok(model)
}

fn prepare_features(
    config: &ExperimentConfig,
    train_set: &BinaryPairSet,
    test_set: &BinaryPairSet,
    seed: u64,
) -> Result<PreparedFeatures> {
    let mut train: Vec<Sample> = vec![Sample::default(); train_set.len()];
    let mut test: Vec<Sample> = vec![Sample::default(); test_set.len()];
    let mut scaler_out = None;

    if needs_pca(config.model) {
        let pca = fit_pca_cached(config, train_set)?;
        let train_features: Vec<FeatureVector> = train_set
            .images
            .rows_iter()
            .map(|row| pca_transform(&pca, row))
            .collect::<Result<_>>()?;
        let scaler = FeatureScaler::fit(train_features.iter(), config.scale_max)?;
        for (sample, fv) in train.iter_mut().zip(&train_features) {
            sample.pca_angles = scaler.transform(fv)?.values;
        }
        for (sample, row) in test.iter_mut().zip(test_set.images.rows_iter()) {
            let fv = pca_transform(&pca, row)?;
            sample.pca_angles = scaler.transform(&fv)?.values;
        }
        scaler_out = Some(scaler);
    }

    if needs_ae(config.model) {
        let ae = fit_ae_cached(config, train_set, seed)?;
        for (sample, row) in train.iter_mut().zip(train_set.images.rows_iter()) {
            sample.ae_features = ae_encode(&ae, row)?.values;
        }
        for (sample, row) in test.iter_mut().zip(test_set.images.rows_iter()) {
            sample.ae_features = ae_encode(&ae, row)?.values;
        }
    }

    Ok(PreparedFeatures {
        train,
        test,
        scaler: scaler_out,
    })
}

/// Test-set predictions of one trained circuit, in sample order.
fn predict_all(
    model: &CompiledModel,
    params: &[f64],
    samples: &[Sample],
) -> Result<Vec<PredictionVector>> {
    samples
        .par_iter()
        .map(|s| model.forward(params, s))
        .collect()
}

/// Everything persisted for one trained seed.
#[derive(Serialize, Deserialize)]
pub struct SeedArtifact {
    pub version: u32,
    pub key: CellKey,
    pub seed: u64,
    pub shared_layers: bool,
    pub train_config: TrainConfig,
    pub scale_max: f64,
    pub scaler: Option<FeatureScaler>,
    /// Parameter vectors by role; single-circuit models store one entry,
    /// the ensemble stores one per component.
    pub params: BTreeMap<String, Vec<f64>>,
    pub metrics: Metrics,
}

impl SeedArtifact {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))
    }
}

impl ExperimentReport {
    /// Rebuild a cell report from persisted per-seed artifacts, e.g. to
    /// re-emit aggregate files without recomputing anything.
    pub fn from_artifacts(key: CellKey, artifacts: &[SeedArtifact]) -> Result<Self> {
        if artifacts.is_empty() {
            return Err(Error::Degenerate(format!("no artifacts for cell {key}")));
        }
        let mut outcomes: Vec<SeedOutcome> = artifacts
            .iter()
            .map(|a| SeedOutcome {
                seed: a.seed,
                metrics: Some(a.metrics),
                final_train_loss: None,
                wall_ms: 0,
                failure: None,
            })
            .collect();
        outcomes.sort_by_key(|o| o.seed);
        let seeds: Vec<u64> = outcomes.iter().map(|o| o.seed).collect();
        Ok(ExperimentReport {
            key,
            seeds,
            mean: mean_metrics(&outcomes),
            outcomes,
            partial: false,
            positive_class: "label 1 (second-named class) is positive".into(),
            train_count: 0,
            test_count: 0,
        })
    }
}

fn persist_seed(
    config: &ExperimentConfig,
    artifact: &SeedArtifact,
    traces: &BTreeMap<String, &TrainTrace>,
) -> Result<()> {
    let Some(out_dir) = &config.out_dir else {
        return Ok(());
    };
    let key = config.key();
    let stem = format!(
        "{}_{}_{}_{}_seed{}",
        key.dataset, key.pair, key.model, key.ansatz, artifact.seed
    );
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let json_path = out_dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(artifact)
        .map_err(|e| Error::Artifact(format!("artifact encode failed: {e}")))?;
    std::fs::write(&json_path, json).map_err(|e| Error::io(json_path.display().to_string(), e))?;
    for (role, trace) in traces {
        let csv_path = out_dir.join(format!("{stem}_{role}_trace.csv"));
        std::fs::write(&csv_path, trace.to_csv())
            .map_err(|e| Error::io(csv_path.display().to_string(), e))?;
    }
    Ok(())
}

fn run_seed(
    config: &ExperimentConfig,
    train_set: &BinaryPairSet,
    test_set: &BinaryPairSet,
    seed: u64,
) -> Result<(Metrics, f64)> {
    let features = prepare_features(config, train_set, test_set, seed)?;
    let train_cfg = TrainConfig {
        seed,
        ..config.train.clone()
    };

    let mut params = BTreeMap::new();
    let mut traces: BTreeMap<String, TrainTrace> = BTreeMap::new();

    let predictions: Vec<usize> = match config.model {
        ModelKind::Ensemble => {
            let spec_a = ModelSpec {
                kind: ModelKind::PcaReencoded,
                ansatz: config.ansatz,
                shared_layers: config.shared_layers,
            };
            let spec_b = ModelSpec {
                kind: ModelKind::AeAmplitude,
                ..spec_a
            };
            let model_a = build_circuit(spec_a)?;
            let model_b = build_circuit(spec_b)?;
            let trace_a = train(&model_a, &features.train, &train_set.labels, &train_cfg)?;
            let trace_b = train(&model_b, &features.train, &train_set.labels, &train_cfg)?;
            let preds_a = predict_all(&model_a, &trace_a.final_params, &features.test)?;
            let preds_b = predict_all(&model_b, &trace_b.final_params, &features.test)?;
            let fused: Vec<usize> = preds_a
                .iter()
                .zip(&preds_b)
                .map(|(pa, pb)| ensemble_predict(pa, pb))
                .collect::<Result<_>>()?;
            params.insert("pca-reencoded".to_string(), trace_a.final_params.clone());
            params.insert("ae-amplitude".to_string(), trace_b.final_params.clone());
            traces.insert("pca-reencoded".to_string(), trace_a);
            traces.insert("ae-amplitude".to_string(), trace_b);
            fused
        }
        kind => {
            let spec = ModelSpec {
                kind,
                ansatz: config.ansatz,
                shared_layers: config.shared_layers,
            };
            let model = build_circuit(spec)?;
            let trace = train(&model, &features.train, &train_set.labels, &train_cfg)?;
            let preds = predict_all(&model, &trace.final_params, &features.test)?;
            params.insert(kind.to_string(), trace.final_params.clone());
            traces.insert(kind.to_string(), trace);
            preds.iter().map(|p| p.predicted_class()).collect()
        }
    };

    let metrics = compute_metrics(&predictions, &test_set.labels)?;
    let final_loss = traces
        .values()
        .filter_map(|t| t.losses.last().copied())
        .sum::<f64>()
        / traces.len().max(1) as f64;

    let artifact = SeedArtifact {
        version: 1,
        key: config.key(),
        seed,
        shared_layers: config.shared_layers,
        train_config: train_cfg,
        scale_max: config.scale_max,
        scaler: features.scaler,
        params,
        metrics,
    };
    let trace_refs: BTreeMap<String, &TrainTrace> =
        traces.iter().map(|(k, v)| (k.clone(), v)).collect();
    persist_seed(config, &artifact, &trace_refs)?;

    Ok((metrics, final_loss))
}

/// Load the configured dataset splits and filter the class pair. The data
/// directory may either contain the IDX files directly or hold them in a
/// `mnist/` / `fashion/` subdirectory.
pub fn load_pair(config: &ExperimentConfig) -> Result<(BinaryPairSet, BinaryPairSet)> {
    let sub = match config.dataset {
        DatasetId::Mnist => config.data_dir.join("mnist"),
        DatasetId::FashionMnist => config.data_dir.join("fashion"),
    };
    let dir = if sub.is_dir() {
        sub
    } else {
        config.data_dir.clone()
    };
    let (train_images, train_labels) = idx_paths(&dir, true);
    let (test_images, test_labels) = idx_paths(&dir, false);
    let train_full = load_idx(&train_images, &train_labels)?;
    let test_full = load_idx(&test_images, &test_labels)?;
    Ok((
        filter_pair(&train_full, config.pair.0, config.pair.1)?,
        filter_pair(&test_full, config.pair.0, config.pair.1)?,
    ))
}

/// Run one experiment cell across its seeds. A failed seed is recorded
/// with its reason and the report is marked partial; remaining seeds still
/// run. A dry run validates the config and dataset and trains nothing.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with_progress(config, |_| {})
}

/// `run_experiment` with a callback invoked after each finished seed.
pub fn run_experiment_with_progress(
    config: &ExperimentConfig,
    mut progress: impl FnMut(&SeedOutcome),
) -> Result<ExperimentReport> {
    config.validate()?;
    let (train_set, test_set) = load_pair(config)?;

    let mut outcomes = Vec::new();
    if !config.dry_run {
        for &seed in &config.seeds {
            let started = Instant::now();
            let outcome = match run_seed(config, &train_set, &test_set, seed) {
                Ok((metrics, final_loss)) => SeedOutcome {
                    seed,
                    metrics: Some(metrics),
                    final_train_loss: Some(final_loss),
                    wall_ms: started.elapsed().as_millis() as u64,
                    failure: None,
                },
                Err(err) => SeedOutcome {
                    seed,
                    metrics: None,
                    final_train_loss: None,
                    wall_ms: started.elapsed().as_millis() as u64,
                    failure: Some(err.to_string()),
                },
            };
            progress(&outcome);
            outcomes.push(outcome);
        }
    }

    let partial = outcomes.iter().any(|o| o.failure.is_some());
    Ok(ExperimentReport {
        key: config.key(),
        seeds: config.seeds.clone(),
        mean: mean_metrics(&outcomes),
        outcomes,
        partial,
        positive_class: format!(
            "label 1 = class {} (second-named); precision/recall use it as positive",
            config.pair.1
        ),
        train_count: train_set.len(),
        test_count: test_set.len(),
    })
}
