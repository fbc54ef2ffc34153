//! `spectral-bench benchmark`: fit the whole model suite and tabulate
//! misclassification, adjusted Rand, and chi-squared on train and test sets.

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde_json::{json, Value};
use spectral_core::dataset::{self, LabeledDataset};
use spectral_core::discriminant::{self, ScatterSet};
use spectral_core::metrics::EvaluationReport;
use spectral_core::neighbors::KnnModel;
use spectral_core::pls;
use spectral_core::svm::{self, SvmConfig};
use spectral_core::Matrix;

use crate::config::{BenchmarkConfig, Choice};

use super::{
    auto_component_range, discriminant_error_name, fmt3, load_dataset, map_labels_by_name,
    neighbors_error_name, pls_error_name, report_for, svm_error_name,
};

#[derive(Args)]
pub struct BenchmarkArgs {
    /// Training dataset CSV
    pub train: PathBuf,
    /// Held-out dataset CSV
    pub test: PathBuf,
    /// Hyperparameter file (flat key=value sections); defaults used if absent
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Optional path for a full-precision JSON report
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    pub label_column: String,
}

/// Hyperparameters plus predictions on both sets, or the failure name.
type FitOutcome = Result<(Value, Vec<usize>, Vec<usize>), String>;

struct Row {
    model: &'static str,
    outcome: Result<RowData, String>,
}

struct RowData {
    hyper: Value,
    train: EvaluationReport,
    test: EvaluationReport,
}

fn fit_plsda_row(train: &LabeledDataset, test_x: &Matrix, config: &BenchmarkConfig) -> FitOutcome {
    let fail = |e: &pls::PlsError| pls_error_name(e).to_string();
    let components = match config.plsda_components {
        Choice::Fixed(p) => p,
        Choice::Auto => {
            let range = auto_component_range(train).map_err(|e| e.to_string())?;
            let (best, _) = pls::select_components(train, range, config.plsda_autoscale)
                .map_err(|e| fail(&e))?;
            best
        }
    };
    let model = pls::fit_plsda(train, components, config.plsda_autoscale).map_err(|e| fail(&e))?;
    let train_pred = model.predict(train.spectra()).map_err(|e| fail(&e))?;
    let test_pred = model.predict(test_x).map_err(|e| fail(&e))?;
    let hyper = json!({
        "components": components,
        "autoscale": config.plsda_autoscale,
    });
    Ok((hyper, train_pred, test_pred))
}

fn fit_knn_row(train: &LabeledDataset, test_x: &Matrix, config: &BenchmarkConfig) -> FitOutcome {
    let fail = |e: &spectral_core::neighbors::NeighborsError| neighbors_error_name(e).to_string();
    let model = KnnModel::from_dataset(train, config.knn_k).map_err(|e| fail(&e))?;
    let train_pred = model.predict(train.spectra()).map_err(|e| fail(&e))?;
    let test_pred = model.predict(test_x).map_err(|e| fail(&e))?;
    Ok((json!({ "k": config.knn_k }), train_pred, test_pred))
}

fn fit_svm_row(train: &LabeledDataset, test_x: &Matrix, config: &BenchmarkConfig) -> FitOutcome {
    let fail = |e: &spectral_core::svm::SvmError| svm_error_name(e).to_string();
    let svm_config = SvmConfig {
        c: config.svm_c,
        epochs: config.svm_epochs,
        learning_rate: config.svm_learning_rate,
    };
    let (centered, mean) = dataset::center(train.spectra());
    let mut model = svm::fit_svm(&centered, train.labels(), train.n_classes(), &svm_config)
        .map_err(|e| fail(&e))?;
    model.absorb_offset(&mean).map_err(|e| fail(&e))?;
    let train_pred = model.predict(train.spectra()).map_err(|e| fail(&e))?;
    let test_pred = model.predict(test_x).map_err(|e| fail(&e))?;
    let hyper = json!({
        "c": model.c(),
        "epochs": model.epochs(),
        "learning_rate": model.learning_rate(),
    });
    Ok((hyper, train_pred, test_pred))
}

fn discriminant_row(
    scatter: &Result<ScatterSet, String>,
    train: &LabeledDataset,
    test_x: &Matrix,
    fit: impl FnOnce(&ScatterSet) -> Result<(Value, discriminant::DiscriminantModel), String>,
) -> FitOutcome {
    let fail = |e: &discriminant::DiscriminantError| discriminant_error_name(e).to_string();
    let scatter = scatter.as_ref().map_err(Clone::clone)?;
    let (hyper, model) = fit(scatter)?;
    let train_pred = model.classify(train.spectra()).map_err(|e| fail(&e))?;
    let test_pred = model.classify(test_x).map_err(|e| fail(&e))?;
    Ok((hyper, train_pred, test_pred))
}

fn build_rows(
    train: &LabeledDataset,
    test_x: &Matrix,
    config: &BenchmarkConfig,
) -> Result<Vec<(&'static str, FitOutcome)>> {
    let dfail = |e: &discriminant::DiscriminantError| discriminant_error_name(e).to_string();
    // One scatter computation serves all four discriminant variants.
    let scatter = ScatterSet::compute(train).map_err(|e| dfail(&e));

    let slda_gamma = match config.slda_gamma {
        Choice::Fixed(gamma) => Ok(gamma),
        Choice::Auto => {
            let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
            discriminant::select_gamma(train, &grid)
                .map(|(best, _)| best)
                .map_err(|e| dfail(&e))
        }
    };

    let rows = vec![
        ("PLS-DA", fit_plsda_row(train, test_x, config)),
        ("KNN", fit_knn_row(train, test_x, config)),
        ("SVM", fit_svm_row(train, test_x, config)),
        (
            "DLDA",
            discriminant_row(&scatter, train, test_x, |s| {
                let model =
                    discriminant::fit_dlda(s, config.dlda_m).map_err(|e| dfail(&e))?;
                Ok((json!({ "m": model.m() }), model))
            }),
        ),
        (
            "SLDA",
            discriminant_row(&scatter, train, test_x, |s| {
                let gamma = slda_gamma?;
                let model = discriminant::fit_slda(s, gamma).map_err(|e| dfail(&e))?;
                Ok((json!({ "gamma": gamma }), model))
            }),
        ),
        (
            "MLDA",
            discriminant_row(&scatter, train, test_x, |s| {
                let model = discriminant::fit_mlda(s).map_err(|e| dfail(&e))?;
                Ok((json!({}), model))
            }),
        ),
        (
            "LDA",
            discriminant_row(&scatter, train, test_x, |s| {
                let model = discriminant::fit_lda(s).map_err(|e| dfail(&e))?;
                Ok((json!({}), model))
            }),
        ),
    ];
    Ok(rows)
}

pub fn run(args: BenchmarkArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("failed to read config {}", path.display()))?;
            crate::config::parse(&text)
                .map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        None => BenchmarkConfig::default(),
    };

    let train = load_dataset(&args.train, &args.label_column)?;
    let test = load_dataset(&args.test, &args.label_column)?;
    if test.spectra().cols() != train.spectra().cols() {
        bail!(
            "test set has {} spectral channels but training set has {}",
            test.spectra().cols(),
            train.spectra().cols()
        );
    }
    // Test labels are remapped into the training set's class order up front,
    // so every confusion table below lives in one label space.
    let test_real = map_labels_by_name(&test, train.class_names())?;
    let train_real = train.labels().to_vec();
    let n_classes = train.n_classes();

    let mut rows = Vec::new();
    for (model, outcome) in build_rows(&train, test.spectra(), &config)? {
        let outcome = match outcome {
            Ok((hyper, train_pred, test_pred)) => Ok(RowData {
                hyper,
                train: report_for(&train_real, &train_pred, n_classes)?,
                test: report_for(&test_real, &test_pred, n_classes)?,
            }),
            Err(reason) => Err(reason),
        };
        rows.push(Row { model, outcome });
    }

    print_table(&rows);

    if let Some(out) = &args.out {
        let body = report_json(&rows);
        let mut text = serde_json::to_string_pretty(&body)?;
        text.push('\n');
        fs::write(out, text)
            .with_context(|| format!("failed to write report to {}", out.display()))?;
        eprintln!("wrote benchmark report to {}", out.display());
    }
    Ok(())
}

fn print_table(rows: &[Row]) {
    let columns = [
        "mis_train",
        "ari_train",
        "chi2_train",
        "mis_test",
        "ari_test",
        "chi2_test",
    ];
    let header: Vec<String> = std::iter::once(format!("{:<8}", "model"))
        .chain(columns.iter().map(|c| format!("{c:>10}")))
        .collect();
    println!("{}", header.join("  "));
    for row in rows {
        match &row.outcome {
            Ok(data) => {
                let stats = [
                    data.train.mis,
                    data.train.ari,
                    data.train.chi2,
                    data.test.mis,
                    data.test.ari,
                    data.test.chi2,
                ];
                let cells: Vec<String> = std::iter::once(format!("{:<8}", row.model))
                    .chain(stats.iter().map(|&v| format!("{:>10}", fmt3(v))))
                    .collect();
                println!("{}", cells.join("  "));
            }
            Err(reason) => {
                println!("{:<8}  FAILED({reason})", row.model);
            }
        }
    }
}

fn report_json(rows: &[Row]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|row| match &row.outcome {
            Ok(data) => json!({
                "model": row.model,
                "hyperparameters": data.hyper,
                "train": {
                    "mis": data.train.mis,
                    "ari": data.train.ari,
                    "chi2": data.train.chi2,
                },
                "test": {
                    "mis": data.test.mis,
                    "ari": data.test.ari,
                    "chi2": data.test.chi2,
                },
            }),
            Err(reason) => json!({
                "model": row.model,
                "failed": reason,
            }),
        })
        .collect();
    json!({
        "format": "report-v1",
        "rows": rows,
    })
}
