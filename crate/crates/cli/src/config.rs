//! Flat key-value config files and their merge with command-line flags.
//!
//! Schema (one `key = value` per line, `#` comments, unknown keys
//! rejected):
//!
//! ```text
//! dataset       = mnist | fashion
//! data_dir      = path to the IDX files (or mnist/ and fashion/ subdirs)
//! pair          = 0v1 | 2v3 | tshirt_vs_trouser | ...
//! model         = conventional | pca-reencoded | ae-amplitude | joint | ensemble
//! ansatz        = 1 | 2
//! seeds         = 1,2,3,4,5
//! iterations    = 200
//! batch_size    = 25
//! learning_rate = 0.05
//! momentum      = 0.9
//! grad_mode     = shift | fdiff
//! fd_step       = 0.0001
//! scale_max     = 3.141592653589793
//! shared_layers = true | false
//! out_dir       = path for reports and per-seed artifacts
//! cache_dir     = path for cached PCA/autoencoder fits
//! dry_run       = true | false
//! ```
//!
//! Command-line flags override file keys; file keys override defaults.

use qcnn_core::data::DatasetId;
use qcnn_core::error::{Error, Result};
use qcnn_core::experiment::{parse_pair, ExperimentConfig};
use qcnn_core::model::{ConvAnsatz, ModelKind};
use qcnn_core::train::GradientMode;
use std::path::PathBuf;

/// Accumulates settings before they harden into an `ExperimentConfig`.
#[derive(Clone, Debug, Default)]
pub struct ConfigDraft {
    pub dataset: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub pair: Option<String>,
    pub model: Option<String>,
    pub ansatz: Option<String>,
    pub seeds: Option<String>,
    pub iterations: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub momentum: Option<f64>,
    pub grad_mode: Option<String>,
    pub fd_step: Option<f64>,
    pub scale_max: Option<f64>,
    pub shared_layers: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub dry_run: Option<bool>,
}

pub fn parse_dataset(s: &str) -> Result<DatasetId> {
    match s {
        "mnist" => Ok(DatasetId::Mnist),
        "fashion" | "fashion-mnist" | "fashion_mnist" => Ok(DatasetId::FashionMnist),
        other => Err(Error::Config(format!("unknown dataset '{other}'"))),
    }
}

pub fn parse_model(s: &str) -> Result<ModelKind> {
    match s {
        "conventional" => Ok(ModelKind::Conventional),
        "pca-reencoded" => Ok(ModelKind::PcaReencoded),
        "ae-amplitude" => Ok(ModelKind::AeAmplitude),
        "joint" => Ok(ModelKind::Joint),
        "ensemble" => Ok(ModelKind::Ensemble),
        other => Err(Error::Config(format!(
            "unknown model '{other}' (conventional, pca-reencoded, ae-amplitude, joint, ensemble)"
        ))),
    }
}

pub fn parse_ansatz(s: &str) -> Result<ConvAnsatz> {
    match s {
        "1" | "so4" | "ansatz1" => Ok(ConvAnsatz::So4),
        "2" | "su4" | "ansatz2" => Ok(ConvAnsatz::Su4),
        other => Err(Error::Config(format!("unknown ansatz '{other}' (1 or 2)"))),
    }
}

pub fn parse_grad_mode(s: &str) -> Result<GradientMode> {
    match s {
        "shift" | "shift-rule" => Ok(GradientMode::ShiftRule),
        "fdiff" | "finite-diff" => Ok(GradientMode::FiniteDiff),
        other => Err(Error::Config(format!(
            "unknown gradient mode '{other}' (shift or fdiff)"
        ))),
    }
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("bad seed '{part}'")))
        })
        .collect()
}

impl ConfigDraft {
    /// Parse a config file; later lines override earlier ones.
    pub fn from_file(path: &PathBuf) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut draft = ConfigDraft::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected 'key = value'",
                    path.display(),
                    lineno + 1
                )));
            };
            draft
                .set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        Ok(draft)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad integer '{v}'")))
        };
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{v}'")))
        };
        let parse_bool = |v: &str| match v {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(Error::Config(format!("bad boolean '{v}'"))),
        };
        match key {
            "dataset" => self.dataset = Some(value.to_string()),
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            "pair" => self.pair = Some(value.to_string()),
            "model" => self.model = Some(value.to_string()),
            "ansatz" => self.ansatz = Some(value.to_string()),
            "seeds" => self.seeds = Some(value.to_string()),
            "iterations" => self.iterations = Some(parse_usize(value)?),
            "batch_size" => self.batch_size = Some(parse_usize(value)?),
            "learning_rate" => self.learning_rate = Some(parse_f64(value)?),
            "momentum" => self.momentum = Some(parse_f64(value)?),
            "grad_mode" => self.grad_mode = Some(value.to_string()),
            "fd_step" => self.fd_step = Some(parse_f64(value)?),
            "scale_max" => self.scale_max = Some(parse_f64(value)?),
            "shared_layers" => self.shared_layers = Some(parse_bool(value)?),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
            "dry_run" => self.dry_run = Some(parse_bool(value)?),
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Overlay `other` (typically CLI flags) on top of this draft.
    pub fn overlay(mut self, other: ConfigDraft) -> ConfigDraft {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(
            dataset,
            data_dir,
            pair,
            model,
            ansatz,
            seeds,
            iterations,
            batch_size,
            learning_rate,
            momentum,
            grad_mode,
            fd_step,
            scale_max,
            shared_layers,
            out_dir,
            cache_dir,
            dry_run
        );
        self
    }

    /// Validate and build the final configuration.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let dataset = parse_dataset(self.dataset.as_deref().unwrap_or("mnist"))?;
        let data_dir = self.data_dir.unwrap_or_else(|| PathBuf::from("data"));
        let pair = parse_pair(dataset, self.pair.as_deref().unwrap_or("0v1"))?;
        let model = parse_model(self.model.as_deref().unwrap_or("pca-reencoded"))?;
        let ansatz = parse_ansatz(self.ansatz.as_deref().unwrap_or("2"))?;

        let mut config = ExperimentConfig::new(dataset, data_dir, pair, model, ansatz);
        if let Some(seeds) = &self.seeds {
            config.seeds = parse_seeds(seeds)?;
        }
        if let Some(v) = self.iterations {
            config.train.iterations = v;
        }
        if let Some(v) = self.batch_size {
            config.train.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            config.train.learning_rate = v;
        }
        if let Some(v) = self.momentum {
            config.train.momentum = v;
        }
        if let Some(mode) = &self.grad_mode {
            config.train.gradient_mode = parse_grad_mode(mode)?;
        }
        if let Some(v) = self.fd_step {
            config.train.fd_step = v;
        }
        if let Some(v) = self.scale_max {
            config.scale_max = v;
        }
        if let Some(v) = self.shared_layers {
            config.shared_layers = v;
        }
        config.out_dir = self.out_dir;
        config.cache_dir = self.cache_dir;
        config.dry_run = self.dry_run.unwrap_or(false);
        config.validate()?;
        Ok(config)
    }
}
