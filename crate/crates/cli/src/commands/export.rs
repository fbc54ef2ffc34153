//! `spectral-bench export`: write plotting tables (CSV) from models and data.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use spectral_core::dataset::LabeledDataset;
use spectral_core::pls::{self, PlsModel};
use spectral_core::StoredModel;

use super::{fmt3, load_dataset, load_model, pls_error_name};

#[derive(Clone, Copy, ValueEnum)]
pub enum ExportKind {
    /// Latent scores with real and predicted labels (needs model + data)
    Scores,
    /// Loadings and squared loadings per wavelength (needs model + data)
    Loadings,
    /// Component-count search curve (needs data)
    Scree,
    /// Raw spectra, one row per wavelength (needs data)
    Spectra,
    /// Explained-variance table (needs model)
    Variance,
}

#[derive(Args)]
pub struct ExportArgs {
    /// Which table to write
    #[arg(long, value_enum)]
    pub what: ExportKind,
    /// Saved model JSON (scores, loadings, variance)
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labeled dataset CSV (scores, loadings, scree, spectra)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// scree: smallest component count to try
    #[arg(long, default_value_t = 2)]
    pub min_components: usize,
    /// scree: largest component count to try
    #[arg(long, default_value_t = 10)]
    pub max_components: usize,
    /// scree: divide each column by its standard deviation before fitting
    #[arg(long)]
    pub autoscale: bool,
}

fn require_data(args: &ExportArgs) -> Result<LabeledDataset> {
    let path = args
        .data
        .as_ref()
        .ok_or_else(|| anyhow!("this export needs --data"))?;
    load_dataset(path, &args.label_column)
}

fn require_latent_model(args: &ExportArgs, what: &str) -> Result<(Vec<String>, PlsModel)> {
    let path = args
        .model
        .as_ref()
        .ok_or_else(|| anyhow!("this export needs --model"))?;
    match load_model(path)? {
        StoredModel::PlsDa { class_names, model } => Ok((class_names, model)),
        other => bail!(
            "IncompatibleExport: {what} requires a PLS-DA model, got {}",
            other.model_name()
        ),
    }
}

fn scores_table(args: &ExportArgs) -> Result<String> {
    let (class_names, model) = require_latent_model(args, "scores")?;
    let data = require_data(args)?;
    let scores = model
        .project_scores(data.spectra())
        .map_err(|e| anyhow!("{}: {e}", pls_error_name(&e)))?;
    let predicted = model
        .predict(data.spectra())
        .map_err(|e| anyhow!("{}: {e}", pls_error_name(&e)))?;

    let mut text = String::new();
    let header: Vec<String> = (1..=model.n_components())
        .map(|p| format!("score_{p}"))
        .chain(["real_label".into(), "predicted_label".into()])
        .collect();
    writeln!(text, "{}", header.join(","))?;
    for i in 0..scores.rows() {
        let mut cells: Vec<String> = scores.row(i).iter().map(|v| format!("{v}")).collect();
        cells.push(data.class_names()[data.labels()[i]].clone());
        cells.push(class_names[predicted[i]].clone());
        writeln!(text, "{}", cells.join(","))?;
    }
    Ok(text)
}

fn loadings_table(args: &ExportArgs) -> Result<String> {
    let (_, model) = require_latent_model(args, "loadings")?;
    let data = require_data(args)?;
    if data.spectra().cols() != model.n_features() {
        bail!(
            "dataset has {} spectral channels but the model expects {}",
            data.spectra().cols(),
            model.n_features()
        );
    }
    let loadings = model.x_loadings();

    let mut text = String::new();
    let mut header = vec!["wavelength".to_string()];
    for p in 1..=model.n_components() {
        header.push(format!("loading_{p}"));
        header.push(format!("squared_loading_{p}"));
    }
    writeln!(text, "{}", header.join(","))?;
    for j in 0..model.n_features() {
        let mut cells = vec![format!("{}", data.grid().wavelength(j))];
        for p in 0..model.n_components() {
            let value = loadings.get(j, p);
            cells.push(format!("{value}"));
            cells.push(format!("{}", value * value));
        }
        writeln!(text, "{}", cells.join(","))?;
    }
    Ok(text)
}

fn scree_table(args: &ExportArgs) -> Result<String> {
    let data = require_data(args)?;
    if args.min_components < 1 || args.min_components > args.max_components {
        bail!(
            "component range {}..={} is empty or starts below 1",
            args.min_components,
            args.max_components
        );
    }
    let range = args.min_components..=args.max_components;
    let (_, curve) = pls::select_components(&data, range, args.autoscale)
        .map_err(|e| anyhow!("{}: {e}", pls_error_name(&e)))?;

    let mut text = String::from("components,chi2\n");
    for (p, chi2) in curve {
        writeln!(text, "{p},{chi2}")?;
    }
    Ok(text)
}

fn spectra_table(args: &ExportArgs) -> Result<String> {
    let data = require_data(args)?;
    let x = data.spectra();

    let mut text = String::new();
    let mut header = vec!["wavelength".to_string()];
    for i in 0..x.rows() {
        header.push(format!("s{}_{}", i + 1, data.class_names()[data.labels()[i]]));
    }
    writeln!(text, "{}", header.join(","))?;
    for j in 0..x.cols() {
        let mut cells = vec![format!("{}", data.grid().wavelength(j))];
        for i in 0..x.rows() {
            cells.push(format!("{}", x.get(i, j)));
        }
        writeln!(text, "{}", cells.join(","))?;
    }
    Ok(text)
}

fn variance_table(args: &ExportArgs) -> Result<String> {
    let (_, model) = require_latent_model(args, "variance")?;

    let mut text = String::new();
    let header: Vec<String> = std::iter::once("statistic".to_string())
        .chain((1..=model.n_components()).map(|p| format!("comp_{p}")))
        .collect();
    writeln!(text, "{}", header.join(","))?;
    let row = |label: &str, values: &[f64]| {
        let cells: Vec<String> = std::iter::once(label.to_string())
            .chain(values.iter().map(|&v| fmt3(v)))
            .collect();
        cells.join(",")
    };
    writeln!(text, "{}", row("explained_pct", model.explained_variance()))?;
    writeln!(
        text,
        "{}",
        row("cumulative_pct", &model.cumulative_explained())
    )?;
    Ok(text)
}

pub fn run(args: ExportArgs) -> Result<()> {
    let text = match args.what {
        ExportKind::Scores => scores_table(&args)?,
        ExportKind::Loadings => loadings_table(&args)?,
        ExportKind::Scree => scree_table(&args)?,
        ExportKind::Spectra => spectra_table(&args)?,
        ExportKind::Variance => variance_table(&args)?,
    };
    fs::write(&args.out, text)
        .with_context(|| format!("failed to write export to {}", args.out.display()))?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
