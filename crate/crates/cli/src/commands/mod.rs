//! Subcommand implementations and the helpers they share.

pub mod benchmark;
pub mod evaluate;
pub mod export;
pub mod split;
pub mod synth;
pub mod train;

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Subcommand;
use spectral_core::dataset::{self, LabeledDataset};
use spectral_core::discriminant::DiscriminantError;
use spectral_core::metrics::EvaluationReport;
use spectral_core::neighbors::NeighborsError;
use spectral_core::pls::PlsError;
use spectral_core::svm::SvmError;
use spectral_core::StoredModel;

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled spectra CSV
    Synth(synth::SynthArgs),
    /// Split a dataset into balanced train and test CSV files
    Split(split::SplitArgs),
    /// Fit one classifier and write its model file
    Train(train::TrainArgs),
    /// Score a model file against a labeled dataset
    Evaluate(evaluate::EvaluateArgs),
    /// Write plotting tables: scores, loadings, scree, spectra, or variance
    Export(export::ExportArgs),
    /// Fit and evaluate the whole model suite in one run
    Benchmark(benchmark::BenchmarkArgs),
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(args) => synth::run(args),
        Command::Split(args) => split::run(args),
        Command::Train(args) => train::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Export(args) => export::run(args),
        Command::Benchmark(args) => benchmark::run(args),
    }
}

pub fn load_dataset(path: &Path, label_column: &str) -> Result<LabeledDataset> {
    dataset::load_csv(path, label_column)
        .with_context(|| format!("failed to load dataset {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<StoredModel> {
    StoredModel::load(path)
        .with_context(|| format!("failed to load model {}", path.display()))
}

/// Three-decimal cell for text tables.
pub fn fmt3(value: f64) -> String {
    format!("{value:.3}")
}

/// Maps this dataset's label indices into the index space defined by
/// `model_names`, matching classes by name. Fails if the dataset carries a
/// class the model has never seen.
pub fn map_labels_by_name(data: &LabeledDataset, model_names: &[String]) -> Result<Vec<usize>> {
    let lookup = |name: &str| model_names.iter().position(|m| m == name);
    let mut mapped = Vec::with_capacity(data.n_samples());
    for &label in data.labels() {
        let name = &data.class_names()[label];
        match lookup(name) {
            Some(index) => mapped.push(index),
            None => bail!(
                "dataset class {name:?} is unknown to the model (model classes: {})",
                model_names.join(", ")
            ),
        }
    }
    Ok(mapped)
}

pub fn report_for(
    real: &[usize],
    predicted: &[usize],
    n_classes: usize,
) -> Result<EvaluationReport> {
    EvaluationReport::compute(real, predicted, n_classes)
        .context("failed to compute evaluation statistics")
}

// Short, stable names for failure variants, used in FAILED(...) cells and
// train-time error messages.

pub fn pls_error_name(err: &PlsError) -> &'static str {
    match err {
        PlsError::InvalidComponents { .. } => "InvalidComponents",
        PlsError::DegenerateComponent { .. } => "DegenerateComponent",
        PlsError::SingularPtw => "SingularPtw",
        PlsError::Linalg(_) => "LinalgError",
        PlsError::Metrics(_) => "MetricsError",
        PlsError::Dataset(_) => "DatasetError",
    }
}

pub fn discriminant_error_name(err: &DiscriminantError) -> &'static str {
    match err {
        DiscriminantError::ClassTooSmall { .. } => "ClassTooSmall",
        DiscriminantError::SingularWithinScatter => "SingularWithinScatter",
        DiscriminantError::MTooLarge { .. } => "MTooLarge",
        DiscriminantError::ZeroEigenvalue { .. } => "ZeroEigenvalue",
        DiscriminantError::GammaOutOfRange { .. } => "GammaOutOfRange",
        DiscriminantError::EmptyGrid => "EmptyGrid",
        DiscriminantError::Linalg(_) => "LinalgError",
    }
}

pub fn svm_error_name(err: &SvmError) -> &'static str {
    match err {
        SvmError::InvalidHyperparameter { .. } => "InvalidHyperparameter",
        SvmError::TooFewClasses { .. } => "TooFewClasses",
        SvmError::LabelCount { .. } => "LabelCount",
        SvmError::LabelOutOfRange { .. } => "LabelOutOfRange",
        SvmError::FeatureMismatch { .. } => "FeatureMismatch",
        SvmError::DivergenceDetected { .. } => "DivergenceDetected",
    }
}

pub fn neighbors_error_name(err: &NeighborsError) -> &'static str {
    match err {
        NeighborsError::EmptyTrainingSet => "EmptyTrainingSet",
        NeighborsError::InvalidK { .. } => "InvalidK",
        NeighborsError::LabelCount { .. } => "LabelCount",
        NeighborsError::LabelOutOfRange { .. } => "LabelOutOfRange",
        NeighborsError::FeatureMismatch { .. } => "FeatureMismatch",
    }
}

/// Component range for automatic selection: 2..=10 narrowed to what the
/// training data can support.
pub fn auto_component_range(data: &LabeledDataset) -> Result<std::ops::RangeInclusive<usize>> {
    let cap = (data.n_samples() - 1).min(data.spectra().cols());
    if cap < 1 {
        bail!("dataset is too small for component selection");
    }
    let hi = 10usize.min(cap);
    let lo = 2usize.min(hi);
    Ok(lo..=hi)
}
