//! Linear multiclass support vector machine in the all-together formulation:
//! one weight vector and bias per class, trained jointly by full-batch
//! subgradient descent on the sum of pairwise hinge losses.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::pls::argmax_lowest;

/// Margin demanded between the true class score and every rival score.
const MARGIN: f64 = 2.0;
/// A training run is abandoned when the objective exceeds this multiple of
/// its starting value.
const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("hyperparameter {name} must be positive and finite, got {value}")]
    InvalidHyperparameter { name: &'static str, value: f64 },
    #[error("need at least 2 classes, got {got}")]
    TooFewClasses { got: usize },
    #[error("expected {expected} labels for {expected} training rows, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("label {label} is out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("rows have {got} columns but the model was trained on {expected}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error(
        "objective diverged at epoch {epoch}: {objective:.3e} exceeds 10x the \
         initial {initial:.3e}; lower the learning rate"
    )]
    DivergenceDetected {
        epoch: usize,
        objective: f64,
        initial: f64,
    },
}

/// Training hyperparameters. `learning_rate` of `None` defaults to
/// `0.1 / n_train` at fit time; the step decays as `eta / (1 + epoch)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
    pub learning_rate: Option<f64>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            epochs: 2000,
            learning_rate: None,
        }
    }
}

/// A fitted linear multiclass SVM: class scores are `w_k · x + b_k` and
/// prediction takes the highest score, ties to the lowest class index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    weights: Matrix,
    biases: Vec<f64>,
    c: f64,
    epochs: usize,
    learning_rate: f64,
    objective_history: Vec<f64>,
}

impl SvmModel {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Objective value before training followed by one entry per epoch.
    pub fn objective_history(&self) -> &[f64] {
        &self.objective_history
    }

    pub fn n_classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_features(&self) -> usize {
        self.weights.cols()
    }

    /// Shape coherence check for deserialized models.
    pub fn validate(&self) -> Result<(), SvmError> {
        if self.biases.len() != self.weights.rows() {
            return Err(SvmError::LabelCount {
                expected: self.weights.rows(),
                got: self.biases.len(),
            });
        }
        if self.weights.rows() < 2 {
            return Err(SvmError::TooFewClasses {
                got: self.weights.rows(),
            });
        }
        for (name, value) in [("C", self.c), ("learning_rate", self.learning_rate)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(SvmError::InvalidHyperparameter { name, value });
            }
        }
        if !self.biases.iter().all(|b| b.is_finite()) {
            return Err(SvmError::InvalidHyperparameter {
                name: "bias",
                value: f64::NAN,
            });
        }
        Ok(())
    }

    /// Per-class decision values `w_k · x + b_k` for each row.
    pub fn decision_values(&self, x_new: &Matrix) -> Result<Matrix, SvmError> {
        if x_new.cols() != self.weights.cols() {
            return Err(SvmError::FeatureMismatch {
                expected: self.weights.cols(),
                got: x_new.cols(),
            });
        }
        let k = self.n_classes();
        Ok(Matrix::from_fn(x_new.rows(), k, |i, class| {
            crate::linalg::dot(x_new.row(i), self.weights.row(class)) + self.biases[class]
        }))
    }

    pub fn predict(&self, x_new: &Matrix) -> Result<Vec<usize>, SvmError> {
        let scores = self.decision_values(x_new)?;
        Ok((0..scores.rows())
            .map(|i| argmax_lowest(scores.row(i)))
            .collect())
    }

    /// Folds a per-column offset into the biases so the model accepts rows
    /// that have not been centered: `b_k -= w_k · mean`.
    pub fn absorb_offset(&mut self, mean: &[f64]) -> Result<(), SvmError> {
        if mean.len() != self.weights.cols() {
            return Err(SvmError::FeatureMismatch {
                expected: self.weights.cols(),
                got: mean.len(),
            });
        }
        for class in 0..self.n_classes() {
            self.biases[class] -= crate::linalg::dot(self.weights.row(class), mean);
        }
        Ok(())
    }

    /// Folds a per-column divisor into the weights so the model accepts rows
    /// that have not been scaled: `w_k <- w_k / scale`. Apply before
    /// [`Self::absorb_offset`] when preprocessing scaled first.
    pub fn absorb_scale(&mut self, scale: &[f64]) -> Result<(), SvmError> {
        if scale.len() != self.weights.cols() {
            return Err(SvmError::FeatureMismatch {
                expected: self.weights.cols(),
                got: scale.len(),
            });
        }
        for class in 0..self.n_classes() {
            for (w, &s) in self.weights.row_mut(class).iter_mut().zip(scale) {
                *w /= s;
            }
        }
        Ok(())
    }
}

fn objective(weights: &Matrix, biases: &[f64], x: &Matrix, labels: &[usize], c: f64) -> f64 {
    let mut value = 0.0;
    for class in 0..weights.rows() {
        value += 0.5 * crate::linalg::dot(weights.row(class), weights.row(class));
    }
    let mut hinge = 0.0;
    for (i, &truth) in labels.iter().enumerate() {
        let row = x.row(i);
        let s_true = crate::linalg::dot(row, weights.row(truth)) + biases[truth];
        for (rival, &b_rival) in biases.iter().enumerate() {
            if rival == truth {
                continue;
            }
            let s_rival = crate::linalg::dot(row, weights.row(rival)) + b_rival;
            let slack = MARGIN - s_true + s_rival;
            if slack > 0.0 {
                hinge += slack;
            }
        }
    }
    value + c * hinge
}

/// Trains the multiclass SVM by full-batch subgradient descent from a zero
/// start. The returned model records the objective before training and after
/// every epoch; training aborts with
/// [`SvmError::DivergenceDetected`] if the objective ever exceeds ten times
/// its initial value.
pub fn fit_svm(
    x: &Matrix,
    labels: &[usize],
    n_classes: usize,
    config: &SvmConfig,
) -> Result<SvmModel, SvmError> {
    let n = x.rows();
    let j = x.cols();
    if labels.len() != n {
        return Err(SvmError::LabelCount {
            expected: n,
            got: labels.len(),
        });
    }
    if n_classes < 2 {
        return Err(SvmError::TooFewClasses { got: n_classes });
    }
    for &label in labels {
        if label >= n_classes {
            return Err(SvmError::LabelOutOfRange {
                label,
                classes: n_classes,
            });
        }
    }
    if !config.c.is_finite() || config.c <= 0.0 {
        return Err(SvmError::InvalidHyperparameter {
            name: "C",
            value: config.c,
        });
    }
    if config.epochs == 0 {
        return Err(SvmError::InvalidHyperparameter {
            name: "epochs",
            value: 0.0,
        });
    }
    let eta0 = config.learning_rate.unwrap_or(0.1 / n as f64);
    if !eta0.is_finite() || eta0 <= 0.0 {
        return Err(SvmError::InvalidHyperparameter {
            name: "learning_rate",
            value: eta0,
        });
    }

    let mut weights = Matrix::zeros(n_classes, j);
    let mut biases = vec![0.0; n_classes];
    let initial = objective(&weights, &biases, x, labels, config.c);
    let mut history = Vec::with_capacity(config.epochs + 1);
    history.push(initial);

    let mut grad_w = Matrix::zeros(n_classes, j);
    let mut grad_b = vec![0.0; n_classes];
    for epoch in 0..config.epochs {
        let eta = eta0 / (1.0 + epoch as f64);

        grad_w.clone_from(&weights);
        grad_b.fill(0.0);
        for (i, &truth) in labels.iter().enumerate() {
            let row = x.row(i);
            let s_true = crate::linalg::dot(row, weights.row(truth)) + biases[truth];
            for rival in 0..n_classes {
                if rival == truth {
                    continue;
                }
                let s_rival = crate::linalg::dot(row, weights.row(rival)) + biases[rival];
                if MARGIN - s_true + s_rival > 0.0 {
                    for (g, &v) in grad_w.row_mut(rival).iter_mut().zip(row) {
                        *g += config.c * v;
                    }
                    for (g, &v) in grad_w.row_mut(truth).iter_mut().zip(row) {
                        *g -= config.c * v;
                    }
                    grad_b[rival] += config.c;
                    grad_b[truth] -= config.c;
                }
            }
        }

        for class in 0..n_classes {
            for (w, &g) in weights.row_mut(class).iter_mut().zip(grad_w.row(class)) {
                *w -= eta * g;
            }
            biases[class] -= eta * grad_b[class];
        }

        let value = objective(&weights, &biases, x, labels, config.c);
        history.push(value);
        if value > DIVERGENCE_FACTOR * initial {
            return Err(SvmError::DivergenceDetected {
                epoch,
                objective: value,
                initial,
            });
        }
    }

    Ok(SvmModel {
        weights,
        biases,
        c: config.c,
        epochs: config.epochs,
        learning_rate: eta0,
        objective_history: history,
    })
}
