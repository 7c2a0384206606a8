//! Report emission: a per-seed CSV, a machine-readable summary keyed by
//! experiment cell, and a flat accuracy table for plotting.

use crate::error::{Error, Result};
use crate::experiment::ExperimentReport;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct EmittedFiles {
    pub results_csv: PathBuf,
    pub summary_json: PathBuf,
    pub plot_csv: PathBuf,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    version: u32,
    positive_class_convention: &'static str,
    cells: &'a [ExperimentReport],
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Emit all three report files into `out_dir`. Rows appear in report
/// order; each cell contributes one row per seed plus one `mean` row.
pub fn emit_report(reports: &[ExperimentReport], out_dir: &Path) -> Result<EmittedFiles> {
    if reports.is_empty() {
        return Err(Error::Degenerate("no experiment reports to emit".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;

    let mut csv = String::from(
        "dataset,pair,model,ansatz,seed,accuracy,precision,recall,f1,tp,fp,tn,fn,status\n",
    );
    for report in reports {
        let k = &report.key;
        for outcome in &report.outcomes {
            match &outcome.metrics {
                Some(m) => {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},ok\n",
                        k.dataset,
                        k.pair,
                        k.model,
                        k.ansatz,
                        outcome.seed,
                        m.accuracy,
                        m.precision,
                        m.recall,
                        m.f1,
                        m.counts.tp,
                        m.counts.fp,
                        m.counts.tn,
                        m.counts.fn_,
                    ));
                }
                None => {
                    csv.push_str(&format!(
                        "{},{},{},{},{},,,,,,,,,failed: {}\n",
                        k.dataset,
                        k.pair,
                        k.model,
                        k.ansatz,
                        outcome.seed,
                        outcome
                            .failure
                            .as_deref()
                            .unwrap_or("unknown")
                            .replace(',', ";"),
                    ));
                }
            }
        }
        if let Some(mean) = &report.mean {
            csv.push_str(&format!(
                "{},{},{},{},mean,{:.6},{:.6},{:.6},{:.6},,,,,over {} seeds\n",
                k.dataset,
                k.pair,
                k.model,
                k.ansatz,
                mean.accuracy,
                mean.precision,
                mean.recall,
                mean.f1,
                mean.seeds_used,
            ));
        }
    }

    let mut plot = String::from("dataset,pair,model,ansatz,mean_accuracy\n");
    for report in reports {
        if let Some(mean) = &report.mean {
            let k = &report.key;
            plot.push_str(&format!(
                "{},{},{},{},{:.6}\n",
                k.dataset, k.pair, k.model, k.ansatz, mean.accuracy
            ));
        }
    }

    let summary = SummaryDoc {
        version: 1,
        positive_class_convention: "label 1 (second-named class of the pair) is positive",
        cells: reports,
    };
    let summary_json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Artifact(format!("summary encode failed: {e}")))?;

    let files = EmittedFiles {
        results_csv: out_dir.join("results.csv"),
        summary_json: out_dir.join("summary.json"),
        plot_csv: out_dir.join("plot_accuracy.csv"),
    };
    write_file(&files.results_csv, &csv)?;
    write_file(&files.summary_json, &summary_json)?;
    write_file(&files.plot_csv, &plot)?;
    Ok(files)
}
