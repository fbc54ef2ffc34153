//! `spectral-bench train`: fit one classifier and write its model file.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};
use spectral_core::dataset::{self, LabeledDataset};
use spectral_core::discriminant::{self, DiscriminantModel, ScatterSet};
use spectral_core::neighbors::KnnModel;
use spectral_core::pls;
use spectral_core::svm::{self, SvmConfig};
use spectral_core::StoredModel;

use super::{
    auto_component_range, discriminant_error_name, load_dataset, neighbors_error_name,
    pls_error_name, svm_error_name,
};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Plsda,
    Knn,
    Svm,
    Lda,
    Dlda,
    Slda,
    Mlda,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            Self::Plsda => "plsda",
            Self::Knn => "knn",
            Self::Svm => "svm",
            Self::Lda => "lda",
            Self::Dlda => "dlda",
            Self::Slda => "slda",
            Self::Mlda => "mlda",
        }
    }
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training dataset CSV
    pub train: PathBuf,
    /// Classifier to fit
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Output path for the model JSON
    #[arg(long)]
    pub out: PathBuf,
    /// Name of the label column
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// plsda: latent components — an integer, or "auto" to search 2..=10
    #[arg(long)]
    pub components: Option<String>,
    /// Divide each column by its standard deviation before fitting
    #[arg(long)]
    pub autoscale: bool,
    /// knn: neighbor count
    #[arg(long)]
    pub k: Option<usize>,
    /// svm: hinge penalty weight
    #[arg(long)]
    pub c: Option<f64>,
    /// svm: training epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// svm: initial learning rate (default 0.1 divided by the sample count)
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// slda: shrinkage in [0,1], or "auto" for a leave-one-out grid search
    #[arg(long)]
    pub gamma: Option<String>,
    /// dlda: retained between-scatter directions — an integer, or "auto"
    #[arg(long)]
    pub m: Option<String>,
}

fn reject_inapplicable_flags(args: &TrainArgs) -> Result<()> {
    let model = args.model;
    let checks: [(&str, bool, &[ModelKind]); 6] = [
        ("--components", args.components.is_some(), &[ModelKind::Plsda]),
        ("--k", args.k.is_some(), &[ModelKind::Knn]),
        (
            "--c/--epochs/--learning-rate",
            args.c.is_some() || args.epochs.is_some() || args.learning_rate.is_some(),
            &[ModelKind::Svm],
        ),
        ("--gamma", args.gamma.is_some(), &[ModelKind::Slda]),
        ("--m", args.m.is_some(), &[ModelKind::Dlda]),
        (
            "--autoscale",
            args.autoscale,
            &[
                ModelKind::Plsda,
                ModelKind::Svm,
                ModelKind::Lda,
                ModelKind::Dlda,
                ModelKind::Slda,
                ModelKind::Mlda,
            ],
        ),
    ];
    for (flag, given, allowed) in checks {
        if given && !allowed.contains(&model) {
            bail!("{flag} does not apply to model {}", model.name());
        }
    }
    Ok(())
}

/// The dataset a discriminant model should be fitted on, plus the column
/// scale that was divided out of it (when autoscaling is requested).
fn working_data(
    data: &LabeledDataset,
    autoscale: bool,
) -> Result<(LabeledDataset, Option<Vec<f64>>)> {
    if !autoscale {
        return Ok((data.clone(), None));
    }
    let scale = dataset::column_std(data.spectra());
    let scaled = dataset::apply_scale(data.spectra(), &scale)?;
    let scaled_data = LabeledDataset::new(
        scaled,
        data.labels().to_vec(),
        data.class_names().to_vec(),
        data.grid().clone(),
    )?;
    Ok((scaled_data, Some(scale)))
}

fn scatter_for(data: &LabeledDataset) -> Result<ScatterSet> {
    ScatterSet::compute(data).map_err(|e| anyhow!("{}: {e}", discriminant_error_name(&e)))
}

fn attach_scale(
    model: DiscriminantModel,
    scale: Option<Vec<f64>>,
) -> Result<DiscriminantModel> {
    match scale {
        Some(scale) => model
            .with_x_scale(scale)
            .map_err(|e| anyhow!("{}: {e}", discriminant_error_name(&e))),
        None => Ok(model),
    }
}

pub fn run(args: TrainArgs) -> Result<()> {
    reject_inapplicable_flags(&args)?;
    let data = load_dataset(&args.train, &args.label_column)?;
    let class_names = data.class_names().to_vec();

    let mut summary = Map::new();
    summary.insert("format".into(), json!("train-v1"));

    let stored = match args.model {
        ModelKind::Plsda => {
            let choice = args.components.as_deref().unwrap_or("auto");
            let (p, scree) = if choice == "auto" {
                let range = auto_component_range(&data)?;
                let (best, curve) = pls::select_components(&data, range, args.autoscale)
                    .map_err(|e| anyhow!("{}: {e}", pls_error_name(&e)))?;
                (best, Some(curve))
            } else {
                let p: usize = choice
                    .parse()
                    .map_err(|_| anyhow!("--components must be an integer or \"auto\""))?;
                (p, None)
            };
            let model = pls::fit_plsda(&data, p, args.autoscale)
                .map_err(|e| anyhow!("{}: {e}", pls_error_name(&e)))?;
            summary.insert("model".into(), json!("PLS-DA"));
            summary.insert("components".into(), json!(p));
            summary.insert("autoscale".into(), json!(args.autoscale));
            summary.insert(
                "explained_variance".into(),
                json!(model.explained_variance()),
            );
            summary.insert(
                "cumulative_explained".into(),
                json!(model.cumulative_explained()),
            );
            if let Some(curve) = scree {
                summary.insert("scree".into(), json!(curve));
            }
            StoredModel::PlsDa {
                class_names,
                model,
            }
        }
        ModelKind::Knn => {
            let k = args.k.unwrap_or(3);
            let model = KnnModel::from_dataset(&data, k)
                .map_err(|e| anyhow!("{}: {e}", neighbors_error_name(&e)))?;
            summary.insert("model".into(), json!("KNN"));
            summary.insert("k".into(), json!(k));
            StoredModel::Knn {
                class_names,
                model,
            }
        }
        ModelKind::Svm => {
            let config = SvmConfig {
                c: args.c.unwrap_or(1.0),
                epochs: args.epochs.unwrap_or(2000),
                learning_rate: args.learning_rate,
            };
            let scale = args
                .autoscale
                .then(|| dataset::column_std(data.spectra()));
            let working = match &scale {
                Some(s) => dataset::apply_scale(data.spectra(), s)?,
                None => data.spectra().clone(),
            };
            let (centered, mean) = dataset::center(&working);
            let mut model =
                svm::fit_svm(&centered, data.labels(), data.n_classes(), &config)
                    .map_err(|e| anyhow!("{}: {e}", svm_error_name(&e)))?;
            model
                .absorb_offset(&mean)
                .map_err(|e| anyhow!("{}: {e}", svm_error_name(&e)))?;
            if let Some(scale) = &scale {
                model
                    .absorb_scale(scale)
                    .map_err(|e| anyhow!("{}: {e}", svm_error_name(&e)))?;
            }
            summary.insert("model".into(), json!("SVM"));
            summary.insert("c".into(), json!(model.c()));
            summary.insert("epochs".into(), json!(model.epochs()));
            summary.insert("learning_rate".into(), json!(model.learning_rate()));
            summary.insert("autoscale".into(), json!(args.autoscale));
            summary.insert(
                "initial_objective".into(),
                json!(model.objective_history()[0]),
            );
            summary.insert(
                "final_objective".into(),
                json!(*model.objective_history().last().expect("nonempty history")),
            );
            StoredModel::Svm {
                class_names,
                model,
            }
        }
        ModelKind::Lda => {
            let (working, scale) = working_data(&data, args.autoscale)?;
            let scatter = scatter_for(&working)?;
            let model = discriminant::fit_lda(&scatter)
                .map_err(|e| anyhow!("{}: {e}", discriminant_error_name(&e)))?;
            let model = attach_scale(model, scale)?;
            summary.insert("model".into(), json!("LDA"));
            summary.insert("autoscale".into(), json!(args.autoscale));
            StoredModel::Discriminant {
                class_names,
                model,
            }
        }
        ModelKind::Dlda => {
            let m = match args.m.as_deref() {
                None | Some("auto") => None,
                Some(text) => Some(text.parse::<usize>().map_err(|_| {
                    anyhow!("--m must be an integer or \"auto\"")
                })?),
            };
            let (working, scale) = working_data(&data, args.autoscale)?;
            let scatter = scatter_for(&working)?;
            let model = discriminant::fit_dlda(&scatter, m)
                .map_err(|e| anyhow!("{}: {e}", discriminant_error_name(&e)))?;
            let retained = model.m();
            let model = attach_scale(model, scale)?;
            summary.insert("model".into(), json!("DLDA"));
            summary.insert("m".into(), json!(retained));
            summary.insert("autoscale".into(), json!(args.autoscale));
            StoredModel::Discriminant {
                class_names,
                model,
            }
        }
        ModelKind::Slda => {
            let choice = args.gamma.as_deref().unwrap_or("0.5");
            let (working, scale) = working_data(&data, args.autoscale)?;
            let scatter = scatter_for(&working)?;
            let (gamma, curve) = if choice == "auto" {
                let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
                let (best, curve) = discriminant::select_gamma(&working, &grid)
                    .map_err(|e| anyhow!("{}: {e}", discriminant_error_name(&e)))?;
                (best, Some(curve))
            } else {
                let gamma: f64 = choice
                    .parse()
                    .map_err(|_| anyhow!("--gamma must be a number or \"auto\""))?;
                (gamma, None)
            };
            let model = discriminant::fit_slda(&scatter, gamma)
                .map_err(|e| anyhow!("{}: {e}", discriminant_error_name(&e)))?;
            let model = attach_scale(model, scale)?;
            summary.insert("model".into(), json!("SLDA"));
            summary.insert("gamma".into(), json!(gamma));
            summary.insert("autoscale".into(), json!(args.autoscale));
            if let Some(curve) = curve {
                summary.insert("gamma_curve".into(), json!(curve));
            }
            StoredModel::Discriminant {
                class_names,
                model,
            }
        }
        ModelKind::Mlda => {
            let (working, scale) = working_data(&data, args.autoscale)?;
            let scatter = scatter_for(&working)?;
            let model = discriminant::fit_mlda(&scatter)
                .map_err(|e| anyhow!("{}: {e}", discriminant_error_name(&e)))?;
            let model = attach_scale(model, scale)?;
            summary.insert("model".into(), json!("MLDA"));
            summary.insert("autoscale".into(), json!(args.autoscale));
            StoredModel::Discriminant {
                class_names,
                model,
            }
        }
    };

    stored
        .save(&args.out)
        .with_context(|| format!("failed to write model to {}", args.out.display()))?;
    eprintln!("wrote {} to {}", stored.describe(), args.out.display());
    println!("{}", serde_json::to_string_pretty(&Value::Object(summary))?);
    Ok(())
}
