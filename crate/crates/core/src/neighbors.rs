//! Brute-force k-nearest-neighbor classification with fully deterministic
//! tie handling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::LabeledDataset;
use crate::linalg::Matrix;

#[derive(Debug, Error)]
pub enum NeighborsError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("k must lie in 1..={n_train}, got {k}")]
    InvalidK { k: usize, n_train: usize },
    #[error("expected {expected} labels for {expected} training rows, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("label {label} is out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("query rows have {got} columns but training rows have {expected}")]
    FeatureMismatch { expected: usize, got: usize },
}

/// A k-nearest-neighbor classifier holding its training data verbatim.
///
/// Prediction is majority vote among the `k` nearest training rows under
/// Euclidean distance. Every tie is broken deterministically: equal
/// distances prefer the lower training-row index, equal vote counts prefer
/// the class with the closest member among the neighbors, and equal
/// closest-member distances prefer the lower class index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    train_x: Matrix,
    train_labels: Vec<usize>,
    n_classes: usize,
    k: usize,
}

impl KnnModel {
    pub fn new(
        train_x: Matrix,
        train_labels: Vec<usize>,
        n_classes: usize,
        k: usize,
    ) -> Result<Self, NeighborsError> {
        let n = train_x.rows();
        if train_labels.is_empty() {
            return Err(NeighborsError::EmptyTrainingSet);
        }
        if train_labels.len() != n {
            return Err(NeighborsError::LabelCount {
                expected: n,
                got: train_labels.len(),
            });
        }
        if n_classes == 0 {
            return Err(NeighborsError::LabelOutOfRange {
                label: 0,
                classes: 0,
            });
        }
        for &label in &train_labels {
            if label >= n_classes {
                return Err(NeighborsError::LabelOutOfRange {
                    label,
                    classes: n_classes,
                });
            }
        }
        if k == 0 || k > n {
            return Err(NeighborsError::InvalidK { k, n_train: n });
        }
        Ok(Self {
            train_x,
            train_labels,
            n_classes,
            k,
        })
    }

    pub fn from_dataset(data: &LabeledDataset, k: usize) -> Result<Self, NeighborsError> {
        Self::new(
            data.spectra().clone(),
            data.labels().to_vec(),
            data.n_classes(),
            k,
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_train(&self) -> usize {
        self.train_labels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.train_x.cols()
    }

    /// Shape coherence check for deserialized models.
    pub fn validate(&self) -> Result<(), NeighborsError> {
        Self::new(
            self.train_x.clone(),
            self.train_labels.clone(),
            self.n_classes,
            self.k,
        )
        .map(|_| ())
    }

    pub fn predict(&self, x_new: &Matrix) -> Result<Vec<usize>, NeighborsError> {
        if x_new.cols() != self.train_x.cols() {
            return Err(NeighborsError::FeatureMismatch {
                expected: self.train_x.cols(),
                got: x_new.cols(),
            });
        }
        let n = self.n_train();
        let mut out = Vec::with_capacity(x_new.rows());
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
        for q in 0..x_new.rows() {
            let query = x_new.row(q);
            order.clear();
            for i in 0..n {
                let mut dist = 0.0;
                for (a, b) in query.iter().zip(self.train_x.row(i)) {
                    let diff = a - b;
                    dist += diff * diff;
                }
                order.push((dist, i));
            }
            order.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .expect("finite distances")
                    .then(a.1.cmp(&b.1))
            });

            let mut votes = vec![0usize; self.n_classes];
            let mut nearest = vec![f64::INFINITY; self.n_classes];
            for &(dist, idx) in &order[..self.k] {
                let class = self.train_labels[idx];
                votes[class] += 1;
                if dist < nearest[class] {
                    nearest[class] = dist;
                }
            }
            let mut best = 0usize;
            for class in 1..self.n_classes {
                let better = votes[class] > votes[best]
                    || (votes[class] == votes[best] && nearest[class] < nearest[best]);
                if better {
                    best = class;
                }
            }
            out.push(best);
        }
        Ok(out)
    }
}
