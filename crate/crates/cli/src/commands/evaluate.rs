//! `spectral-bench evaluate`: score a saved model against a labeled dataset.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;
use spectral_core::metrics::EvaluationReport;

use super::{fmt3, load_dataset, load_model, map_labels_by_name};

#[derive(Args)]
pub struct EvaluateArgs {
    /// Saved model JSON
    pub model: PathBuf,
    /// Labeled dataset CSV to score
    pub data: PathBuf,
    /// Optional path for a full-precision JSON report
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    pub label_column: String,
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let stored = load_model(&args.model)?;
    let data = load_dataset(&args.data, &args.label_column)?;
    if data.spectra().cols() != stored.n_features() {
        bail!(
            "dataset has {} spectral channels but the model expects {}",
            data.spectra().cols(),
            stored.n_features()
        );
    }

    let real = map_labels_by_name(&data, stored.class_names())?;
    let predicted = stored
        .predict(data.spectra())
        .context("prediction failed")?;
    let report = EvaluationReport::compute(&real, &predicted, stored.class_names().len())?;

    let name = stored.model_name();
    println!("model mis ari chi2");
    println!(
        "{name} {} {} {}",
        fmt3(report.mis),
        fmt3(report.ari),
        fmt3(report.chi2)
    );

    if let Some(out) = &args.out {
        let confusion: Vec<Vec<u64>> = (0..report.confusion.rows())
            .map(|r| {
                (0..report.confusion.cols())
                    .map(|c| report.confusion.get(r, c))
                    .collect()
            })
            .collect();
        let body = json!({
            "format": "report-v1",
            "model": name,
            "class_names": stored.class_names(),
            "confusion": confusion,
            "mis": report.mis,
            "ari": report.ari,
            "chi2": report.chi2,
        });
        let mut text = serde_json::to_string_pretty(&body)?;
        text.push('\n');
        fs::write(out, text)
            .with_context(|| format!("failed to write report to {}", out.display()))?;
        eprintln!("wrote evaluation report to {}", out.display());
    }
    Ok(())
}
