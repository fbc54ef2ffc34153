//! `spectral-bench split`: balanced train/test partition of a dataset CSV.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use super::load_dataset;

#[derive(Args)]
pub struct SplitArgs {
    /// Input dataset CSV
    pub input: PathBuf,
    /// Fraction of each class assigned to the training set
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Random seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output path for the training CSV
    #[arg(long)]
    pub train_out: PathBuf,
    /// Output path for the test CSV
    #[arg(long)]
    pub test_out: PathBuf,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    pub label_column: String,
}

pub fn run(args: SplitArgs) -> Result<()> {
    let data = load_dataset(&args.input, &args.label_column)?;
    let split = data
        .balanced_split(args.train_fraction, args.seed)
        .context("failed to split dataset")?;
    let train = data.subset(&split.train_indices)?;
    let test = data.subset(&split.test_indices)?;
    train
        .write_csv(&args.train_out)
        .with_context(|| format!("failed to write {}", args.train_out.display()))?;
    test.write_csv(&args.test_out)
        .with_context(|| format!("failed to write {}", args.test_out.display()))?;

    let summary = json!({
        "format": "split-v1",
        "seed": args.seed,
        "train_fraction": args.train_fraction,
        "classes": data.class_names(),
        "train_counts": train.class_counts(),
        "test_counts": test.class_counts(),
        "train_total": train.n_samples(),
        "test_total": test.n_samples(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
