//! Confusion-matrix metrics for binary predictions. Label 1 is the
//! positive class; a precision or recall whose denominator is zero is
//! reported as 0 with a degeneracy flag rather than NaN.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
    /// Set when the precision (resp. recall) denominator was zero.
    pub precision_degenerate: bool,
    pub recall_degenerate: bool,
}

pub fn compute_metrics(predictions: &[usize], labels: &[u8]) -> Result<Metrics> {
    if predictions.is_empty() {
        return Err(Error::Degenerate("no predictions to score".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut counts = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&pred, &label) in predictions.iter().zip(labels) {
        if label > 1 || pred > 1 {
            return Err(Error::Validation(format!(
                "binary metrics need labels in {{0,1}}, got pred {pred} / label {label}"
            )));
        }
        match (pred, label) {
            (1, 1) => counts.tp += 1,
            (1, 0) => counts.fp += 1,
            (0, 0) => counts.tn += 1,
            (0, 1) => counts.fn_ += 1,
            _ => unreachable!(),
        }
    }
    Ok(metrics_from_counts(counts))
}

pub fn metrics_from_counts(counts: ConfusionCounts) -> Metrics {
    let accuracy = (counts.tp + counts.tn) as f64 / counts.total() as f64;
    let precision_degenerate = counts.tp + counts.fp == 0;
    let recall_degenerate = counts.tp + counts.fn_ == 0;
    let precision = if precision_degenerate {
        0.0
    } else {
        counts.tp as f64 / (counts.tp + counts.fp) as f64
    };
    let recall = if recall_degenerate {
        0.0
    } else {
        counts.tp as f64 / (counts.tp + counts.fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Metrics {
        accuracy,
        precision,
        recall,
        f1,
        counts,
        precision_degenerate,
        recall_degenerate,
    }
}
