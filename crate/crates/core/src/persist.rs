//! Versioned JSON envelopes for fitted models. Every artifact records its
//! format tag and the class names it predicts, so a loaded model can be
//! matched against datasets by name rather than by label order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discriminant::DiscriminantModel;
use crate::linalg::Matrix;
use crate::neighbors::KnnModel;
use crate::pls::PlsModel;
use crate::svm::SvmModel;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("model file not found: {path}")]
    FileNotFound { path: String },
    #[error("failed to read or write model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file is not valid JSON for any known format: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model file failed validation: {message}")]
    Invalid { message: String },
}

/// A fitted model plus the class names it emits, tagged with a format
/// version string (`plsda-v1`, `disc-v1`, `svm-v1`, or `knn-v1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format")]
pub enum StoredModel {
    #[serde(rename = "plsda-v1")]
    PlsDa {
        class_names: Vec<String>,
        model: PlsModel,
    },
    #[serde(rename = "disc-v1")]
    Discriminant {
        class_names: Vec<String>,
        model: DiscriminantModel,
    },
    #[serde(rename = "svm-v1")]
    Svm {
        class_names: Vec<String>,
        model: SvmModel,
    },
    #[serde(rename = "knn-v1")]
    Knn {
        class_names: Vec<String>,
        model: KnnModel,
    },
}

impl StoredModel {
    pub fn class_names(&self) -> &[String] {
        match self {
            Self::PlsDa { class_names, .. }
            | Self::Discriminant { class_names, .. }
            | Self::Svm { class_names, .. }
            | Self::Knn { class_names, .. } => class_names,
        }
    }

    /// The format tag this envelope serializes under.
    pub fn format(&self) -> &'static str {
        match self {
            Self::PlsDa { .. } => "plsda-v1",
            Self::Discriminant { .. } => "disc-v1",
            Self::Svm { .. } => "svm-v1",
            Self::Knn { .. } => "knn-v1",
        }
    }

    /// Short display name of the underlying classifier, as used in report
    /// tables: `PLS-DA`, `LDA`, `DLDA`, `SLDA`, `MLDA`, `SVM`, or `KNN`.
    pub fn model_name(&self) -> String {
        match self {
            Self::PlsDa { .. } => "PLS-DA".to_string(),
            Self::Discriminant { model, .. } => model.variant().to_string(),
            Self::Svm { .. } => "SVM".to_string(),
            Self::Knn { .. } => "KNN".to_string(),
        }
    }

    /// Human-readable one-line summary for status output.
    pub fn describe(&self) -> String {
        match self {
            Self::PlsDa { model, .. } => format!(
                "PLS-DA with {} components over {} classes",
                model.n_components(),
                model.n_classes()
            ),
            Self::Discriminant { model, .. } => {
                let detail = match (model.gamma(), model.m()) {
                    (Some(g), _) => format!(" (gamma {g})"),
                    (_, Some(m)) => format!(" ({m} directions)"),
                    _ => String::new(),
                };
                format!(
                    "{}{} over {} classes",
                    model.variant(),
                    detail,
                    model.n_classes()
                )
            }
            Self::Svm { model, .. } => format!(
                "linear SVM (C {}) over {} classes",
                model.c(),
                model.n_classes()
            ),
            Self::Knn { model, .. } => format!(
                "KNN (k {}) over {} classes",
                model.k(),
                model.n_classes()
            ),
        }
    }

    fn model_classes(&self) -> usize {
        match self {
            Self::PlsDa { model, .. } => model.n_classes(),
            Self::Discriminant { model, .. } => model.n_classes(),
            Self::Svm { model, .. } => model.n_classes(),
            Self::Knn { model, .. } => model.n_classes(),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Self::PlsDa { model, .. } => model.n_features(),
            Self::Discriminant { model, .. } => model.n_features(),
            Self::Svm { model, .. } => model.n_features(),
            Self::Knn { model, .. } => model.n_features(),
        }
    }

    /// Checks internal shape coherence and that the class names line up with
    /// the model's class count.
    pub fn validate(&self) -> Result<(), PersistError> {
        let invalid = |message: String| PersistError::Invalid { message };
        let names = self.class_names();
        if names.is_empty() {
            return Err(invalid("class name list is empty".into()));
        }
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() {
                return Err(invalid(format!("class name {} is empty", i + 1)));
            }
            if names[..i].contains(a) {
                return Err(invalid(format!("duplicate class name {a:?}")));
            }
        }
        if names.len() != self.model_classes() {
            return Err(invalid(format!(
                "{} class names for a model with {} classes",
                names.len(),
                self.model_classes()
            )));
        }
        let coherent = match self {
            Self::PlsDa { model, .. } => model.validate().is_ok(),
            Self::Discriminant { model, .. } => model.validate().is_ok(),
            Self::Svm { model, .. } => model.validate().is_ok(),
            Self::Knn { model, .. } => model.validate().is_ok(),
        };
        if coherent {
            Ok(())
        } else {
            Err(invalid("model shapes are internally inconsistent".into()))
        }
    }

    /// Predicted class indices (into [`Self::class_names`]) for each row.
    pub fn predict(&self, x_new: &Matrix) -> Result<Vec<usize>, PersistError> {
        let run = |message: String| PersistError::Invalid { message };
        match self {
            Self::PlsDa { model, .. } => model.predict(x_new).map_err(|e| run(e.to_string())),
            Self::Discriminant { model, .. } => {
                model.classify(x_new).map_err(|e| run(e.to_string()))
            }
            Self::Svm { model, .. } => model.predict(x_new).map_err(|e| run(e.to_string())),
            Self::Knn { model, .. } => model.predict(x_new).map_err(|e| run(e.to_string())),
        }
    }

    /// Serializes to pretty-printed JSON ending in a newline.
    pub fn to_json(&self) -> Result<String, PersistError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn save(&self, path: &Path) -> Result<(), PersistError> {
        self.validate()?;
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PersistError> {
        if !path.exists() {
            return Err(PersistError::FileNotFound {
                path: path.display().to_string(),
            });
        }
        let text = fs::read_to_string(path)?;
        let stored: Self = serde_json::from_str(&text)?;
        stored.validate()?;
        Ok(stored)
    }
}
