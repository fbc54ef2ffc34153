//! Partition-comparison metrics: confusion matrices, misclassification rate,
//! adjusted Rand index, and the Pearson chi-squared statistic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("label vectors have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} labeled samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("confusion matrix is {rows}x{cols}, not square")]
    NonSquare { rows: usize, cols: usize },
    #[error("adjusted Rand index undefined: zero denominator with non-identical partitions")]
    Undefined,
    #[error("confusion matrix has no observations")]
    EmptyTable,
}

/// Contingency table of real classes (rows) against predicted classes
/// (columns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConfusion")]
pub struct ConfusionMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

#[derive(Deserialize)]
struct RawConfusion {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl TryFrom<RawConfusion> for ConfusionMatrix {
    type Error = MetricsError;

    fn try_from(raw: RawConfusion) -> Result<Self, Self::Error> {
        let table: Vec<Vec<u64>> = raw
            .counts
            .chunks(raw.cols.max(1))
            .map(|c| c.to_vec())
            .collect();
        if raw.rows == 0 || raw.cols == 0 || raw.counts.len() != raw.rows * raw.cols {
            return Err(MetricsError::EmptyTable);
        }
        ConfusionMatrix::from_counts(&table)
    }
}

impl ConfusionMatrix {
    /// Square table over `n_classes` labels; every label must be `< n_classes`.
    pub fn from_labels(
        real: &[usize],
        predicted: &[usize],
        n_classes: usize,
    ) -> Result<Self, MetricsError> {
        if real.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch {
                left: real.len(),
                right: predicted.len(),
            });
        }
        if real.is_empty() {
            return Err(MetricsError::TooShort { needed: 1, got: 0 });
        }
        let mut counts = vec![0u64; n_classes * n_classes];
        for (&r, &c) in real.iter().zip(predicted) {
            if r >= n_classes {
                return Err(MetricsError::LabelOutOfRange {
                    label: r,
                    classes: n_classes,
                });
            }
            if c >= n_classes {
                return Err(MetricsError::LabelOutOfRange {
                    label: c,
                    classes: n_classes,
                });
            }
            counts[r * n_classes + c] += 1;
        }
        Ok(Self {
            rows: n_classes,
            cols: n_classes,
            counts,
        })
    }

    /// General R×C table from explicit counts.
    pub fn from_counts(table: &[Vec<u64>]) -> Result<Self, MetricsError> {
        if table.is_empty() || table[0].is_empty() {
            return Err(MetricsError::EmptyTable);
        }
        let cols = table[0].len();
        let mut counts = Vec::with_capacity(table.len() * cols);
        for row in table {
            if row.len() != cols {
                return Err(MetricsError::LengthMismatch {
                    left: cols,
                    right: row.len(),
                });
            }
            counts.extend_from_slice(row);
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(MetricsError::EmptyTable);
        }
        Ok(Self {
            rows: table.len(),
            cols,
            counts,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.counts[r * self.cols + c]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|r| self.counts[r * self.cols..(r + 1) * self.cols].iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.cols];
        for r in 0..self.rows {
            for (c, s) in sums.iter_mut().enumerate() {
                *s += self.get(r, c);
            }
        }
        sums
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Fraction of off-diagonal mass: `1 − trace/n`. Requires a square table.
pub fn mis_rate(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    if cm.rows() != cm.cols() {
        return Err(MetricsError::NonSquare {
            rows: cm.rows(),
            cols: cm.cols(),
        });
    }
    let trace: u64 = (0..cm.rows()).map(|i| cm.get(i, i)).sum();
    Ok(1.0 - trace as f64 / cm.total() as f64)
}

fn choose2(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// True when each real cluster coincides with exactly one predicted cluster:
/// the two label vectors describe the same partition up to renaming.
fn identical_partitions(cm: &ConfusionMatrix) -> bool {
    for r in 0..cm.rows() {
        let nonzero = (0..cm.cols()).filter(|&c| cm.get(r, c) > 0).count();
        let occupied = (0..cm.cols()).any(|c| cm.get(r, c) > 0);
        if occupied && nonzero != 1 {
            return false;
        }
    }
    for c in 0..cm.cols() {
        let nonzero = (0..cm.rows()).filter(|&r| cm.get(r, c) > 0).count();
        let occupied = (0..cm.rows()).any(|r| cm.get(r, c) > 0);
        if occupied && nonzero != 1 {
            return false;
        }
    }
    true
}

/// Adjusted Rand index between two labelings of the same samples. Label
/// values only matter through the partitions they induce.
pub fn adjusted_rand(real: &[usize], predicted: &[usize]) -> Result<f64, MetricsError> {
    if real.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch {
            left: real.len(),
            right: predicted.len(),
        });
    }
    if real.len() < 2 {
        return Err(MetricsError::TooShort {
            needed: 2,
            got: real.len(),
        });
    }
    let k = real
        .iter()
        .chain(predicted)
        .max()
        .copied()
        .expect("nonempty")
        + 1;
    let cm = ConfusionMatrix::from_labels(real, predicted, k)?;

    let index: f64 = cm.counts.iter().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = cm.row_sums().iter().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cm.col_sums().iter().map(|&c| choose2(c)).sum();
    let total_pairs = choose2(cm.total());
    let expected = sum_rows * sum_cols / total_pairs;
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom == 0.0 {
        return if identical_partitions(&cm) {
            Ok(1.0)
        } else {
            Err(MetricsError::Undefined)
        };
    }
    Ok((index - expected) / denom)
}

/// Pearson chi-squared statistic of a contingency table. Rows and columns
/// with zero margin contribute nothing; a table whose mass sits in a single
/// cell scores 0.
pub fn chi_squared(cm: &ConfusionMatrix) -> f64 {
    let row_sums = cm.row_sums();
    let col_sums = cm.col_sums();
    let n = cm.total() as f64;
    let mut stat = 0.0;
    for (r, &nr) in row_sums.iter().enumerate() {
        if nr == 0 {
            continue;
        }
        for (c, &nc) in col_sums.iter().enumerate() {
            if nc == 0 {
                continue;
            }
            let expected = nr as f64 * nc as f64 / n;
            let observed = cm.get(r, c) as f64;
            let d = observed - expected;
            stat += d * d / expected;
        }
    }
    stat
}

/// Confusion matrix plus the three scalar statistics reported per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub confusion: ConfusionMatrix,
    pub mis: f64,
    pub ari: f64,
    pub chi2: f64,
}

impl EvaluationReport {
    pub fn compute(
        real: &[usize],
        predicted: &[usize],
        n_classes: usize,
    ) -> Result<Self, MetricsError> {
        let confusion = ConfusionMatrix::from_labels(real, predicted, n_classes)?;
        let mis = mis_rate(&confusion)?;
        let ari = adjusted_rand(real, predicted)?;
        let chi2 = chi_squared(&confusion);
        Ok(Self {
            confusion,
            mis,
            ari,
            chi2,
        })
    }
}
