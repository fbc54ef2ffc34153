//! Partial least squares on coded class responses (PLS-DA): NIPALS fitting,
//! regression-coefficient extraction, explained-variance accounting, and
//! chi-squared-driven component selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, LabeledDataset};
use crate::linalg::{self, dot, LinalgError, Matrix};
use crate::metrics::{self, ConfusionMatrix, MetricsError};

/// Weight/score vectors whose norm falls below this are treated as collapsed.
const DEGENERATE_NORM: f64 = 1e-12;
/// Below-diagonal entries of `PᵀW` under this (relative) bound certify the
/// triangular back-substitution path.
const TRIANGULAR_RTOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PlsError {
    #[error("requested {requested} components but the data supports at most {max}")]
    InvalidComponents { requested: usize, max: usize },
    #[error("component {component} collapsed: weight or score norm below 1e-12")]
    DegenerateComponent { component: usize },
    #[error("loading-weight product is singular; the fit is degenerate")]
    SingularPtw,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dataset(#[from] dataset::DatasetError),
}

/// One-hot class membership coding: row i has a single 1 in the column of
/// sample i's class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCoding {
    k: usize,
    coding: Matrix,
}

impl ClassCoding {
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self, PlsError> {
        if labels.is_empty() || k == 0 {
            return Err(MetricsError::TooShort {
                needed: 1,
                got: labels.len(),
            }
            .into());
        }
        let mut coding = Matrix::zeros(labels.len(), k);
        for (i, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(MetricsError::LabelOutOfRange { label, classes: k }.into());
            }
            coding.set(i, label, 1.0);
        }
        Ok(Self { k, coding })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &Matrix {
        &self.coding
    }
}

/// Fitted PLS model on class-coded responses.
///
/// `weights`, `x_loadings` are J×P; `scores` is n×P with orthonormal columns;
/// `y_loadings` is K×P; `coefficients` is the J×K matrix B such that
/// `(x − x_mean)·B + y_mean` predicts the coded response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsModel {
    n_components: usize,
    weights: Matrix,
    scores: Matrix,
    x_loadings: Matrix,
    y_loadings: Matrix,
    coefficients: Matrix,
    x_mean: Vec<f64>,
    y_mean: Vec<f64>,
    x_scale: Option<Vec<f64>>,
    explained_variance_x: Vec<f64>,
}

struct NipalsFit {
    weights: Matrix,
    scores: Matrix,
    x_loadings: Matrix,
    y_loadings: Matrix,
    explained: Vec<f64>,
}

/// The NIPALS loop on centered data. Per component: weights from the X–Y
/// cross-product (reduced to a single direction via the dominant eigenvector
/// of its Gram matrix when Y has several columns), unit-normalized scores,
/// loadings by projection, then rank-one deflation of both blocks.
fn nipals(x: &Matrix, y: &Matrix, n_components: usize) -> Result<NipalsFit, PlsError> {
    let n = x.rows();
    let j = x.cols();
    let k = y.cols();
    let mut e = x.clone();
    let mut f = y.clone();
    let x_total = x.frobenius_norm().powi(2);

    let mut weights = Matrix::zeros(j, n_components);
    let mut scores = Matrix::zeros(n, n_components);
    let mut x_loadings = Matrix::zeros(j, n_components);
    let mut y_loadings = Matrix::zeros(k, n_components);
    let mut explained = Vec::with_capacity(n_components);

    for p in 0..n_components {
        let cross = e.tr_matmul(&f)?;
        let w: Vec<f64> = if k == 1 {
            cross.column(0)
        } else {
            let gram = cross.tr_matmul(&cross)?;
            let eig = linalg::sym_eigen(&gram)?;
            let c = eig.vectors.column(0);
            cross.mat_vec(&c)?
        };
        if dot(&w, &w).sqrt() < DEGENERATE_NORM {
            return Err(PlsError::DegenerateComponent { component: p + 1 });
        }

        let t_raw = e.mat_vec(&w)?;
        let t_norm = dot(&t_raw, &t_raw).sqrt();
        if t_norm < DEGENERATE_NORM {
            return Err(PlsError::DegenerateComponent { component: p + 1 });
        }
        let t: Vec<f64> = t_raw.iter().map(|v| v / t_norm).collect();

        let p_load: Vec<f64> = (0..j)
            .map(|col| (0..n).map(|row| e.get(row, col) * t[row]).sum())
            .collect();
        let q_load: Vec<f64> = (0..k)
            .map(|col| (0..n).map(|row| f.get(row, col) * t[row]).sum())
            .collect();

        subtract_outer(&mut e, &t, &p_load);
        subtract_outer(&mut f, &t, &q_load);

        // With unit-norm scores, the rank-one slab t·pᵀ carries ‖p‖² of the
        // total squared Frobenius mass of x.
        explained.push(100.0 * dot(&p_load, &p_load) / x_total);

        for (row, &v) in w.iter().enumerate() {
            weights.set(row, p, v);
        }
        for (row, &v) in t.iter().enumerate() {
            scores.set(row, p, v);
        }
        for (row, &v) in p_load.iter().enumerate() {
            x_loadings.set(row, p, v);
        }
        for (row, &v) in q_load.iter().enumerate() {
            y_loadings.set(row, p, v);
        }
    }

    Ok(NipalsFit {
        weights,
        scores,
        x_loadings,
        y_loadings,
        explained,
    })
}

fn subtract_outer(m: &mut Matrix, u: &[f64], v: &[f64]) {
    for (i, &ui) in u.iter().enumerate() {
        let row = m.row_mut(i);
        for (j, &vj) in v.iter().enumerate() {
            row[j] -= ui * vj;
        }
    }
}

/// `B = W · (P_matᵀ W)^{-1} · Qᵀ`. Under NIPALS deflation `PᵀW` is upper
/// triangular, so back-substitution applies; a general solve covers inputs
/// where the triangular structure has eroded.
fn coefficient_matrix(
    weights: &Matrix,
    x_loadings: &Matrix,
    y_loadings: &Matrix,
) -> Result<Matrix, PlsError> {
    let ptw = x_loadings.tr_matmul(weights)?;
    let p = ptw.rows();
    let q_t = y_loadings.transpose();
    let bound = TRIANGULAR_RTOL * 1.0_f64.max(ptw.max_abs());
    let triangular = (1..p).all(|i| (0..i).all(|j| ptw.get(i, j).abs() < bound));

    let inner = if triangular {
        let diag_bound = 1e-12 * 1.0_f64.max(ptw.max_abs());
        let mut r = q_t.clone();
        for i in (0..p).rev() {
            let pivot = ptw.get(i, i);
            if pivot.abs() <= diag_bound {
                return Err(PlsError::SingularPtw);
            }
            for col in 0..r.cols() {
                let mut acc = q_t.get(i, col);
                for l in (i + 1)..p {
                    acc -= ptw.get(i, l) * r.get(l, col);
                }
                r.set(i, col, acc / pivot);
            }
        }
        r
    } else {
        linalg::solve(&ptw, &q_t).map_err(|e| match e {
            LinalgError::Singular { .. } => PlsError::SingularPtw,
            other => PlsError::Linalg(other),
        })?
    };
    Ok(weights.matmul(&inner)?)
}

/// Fits PLS on already-centered blocks; the resulting model carries zero
/// means (predictions treat inputs as pre-centered).
pub fn fit_pls(x: &Matrix, y: &Matrix, n_components: usize) -> Result<PlsModel, PlsError> {
    if x.rows() != y.rows() {
        return Err(LinalgError::ShapeMismatch {
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: y.rows(),
            right_cols: y.cols(),
        }
        .into());
    }
    let max = (x.rows() - 1).min(x.cols());
    if n_components == 0 || n_components > max {
        return Err(PlsError::InvalidComponents {
            requested: n_components,
            max,
        });
    }
    let fit = nipals(x, y, n_components)?;
    let coefficients = coefficient_matrix(&fit.weights, &fit.x_loadings, &fit.y_loadings)?;
    Ok(PlsModel {
        n_components,
        weights: fit.weights,
        scores: fit.scores,
        x_loadings: fit.x_loadings,
        y_loadings: fit.y_loadings,
        coefficients,
        x_mean: vec![0.0; x.cols()],
        y_mean: vec![0.0; y.cols()],
        x_scale: None,
        explained_variance_x: fit.explained,
    })
}

/// Fits a PLS-DA classifier: one-hot codes the labels, centers both blocks
/// (and optionally autoscales the spectra), and retains the centering
/// statistics so prediction accepts raw spectra.
pub fn fit_plsda(
    data: &LabeledDataset,
    n_components: usize,
    autoscale: bool,
) -> Result<PlsModel, PlsError> {
    let (mut xc, x_mean) = dataset::center(data.spectra());
    let x_scale = if autoscale {
        let sd = dataset::column_std(data.spectra());
        xc = dataset::apply_scale(&xc, &sd)?;
        Some(sd)
    } else {
        None
    };
    let coding = ClassCoding::from_labels(data.labels(), data.n_classes())?;
    let (yc, y_mean) = dataset::center(coding.matrix());

    let mut model = fit_pls(&xc, &yc, n_components)?;
    model.x_mean = x_mean;
    model.y_mean = y_mean;
    model.x_scale = x_scale;
    Ok(model)
}

impl PlsModel {
    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_classes(&self) -> usize {
        self.y_mean.len()
    }

    pub fn n_features(&self) -> usize {
        self.x_mean.len()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn scores(&self) -> &Matrix {
        &self.scores
    }

    pub fn x_loadings(&self) -> &Matrix {
        &self.x_loadings
    }

    pub fn y_loadings(&self) -> &Matrix {
        &self.y_loadings
    }

    pub fn coefficients(&self) -> &Matrix {
        &self.coefficients
    }

    pub fn x_mean(&self) -> &[f64] {
        &self.x_mean
    }

    pub fn y_mean(&self) -> &[f64] {
        &self.y_mean
    }

    pub fn x_scale(&self) -> Option<&[f64]> {
        self.x_scale.as_deref()
    }

    /// Percent of the training X variance captured per component.
    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance_x
    }

    /// Running sums of [`Self::explained_variance`].
    pub fn cumulative_explained(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.explained_variance_x
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect()
    }

    /// Cross-model shape consistency; deserialized models pass through here
    /// before use.
    pub fn validate(&self) -> Result<(), PlsError> {
        let j = self.x_mean.len();
        let k = self.y_mean.len();
        let p = self.n_components;
        let shapes_ok = self.weights.rows() == j
            && self.weights.cols() == p
            && self.x_loadings.rows() == j
            && self.x_loadings.cols() == p
            && self.y_loadings.rows() == k
            && self.y_loadings.cols() == p
            && self.coefficients.rows() == j
            && self.coefficients.cols() == k
            && self.scores.cols() == p
            && self.explained_variance_x.len() == p
            && self.x_scale.as_ref().is_none_or(|s| s.len() == j);
        if shapes_ok {
            Ok(())
        } else {
            Err(LinalgError::ShapeMismatch {
                left_rows: self.weights.rows(),
                left_cols: self.weights.cols(),
                right_rows: j,
                right_cols: p,
            }
            .into())
        }
    }

    fn prepare(&self, x_new: &Matrix) -> Result<Matrix, PlsError> {
        let mut e = dataset::apply_center(x_new, &self.x_mean)?;
        if let Some(scale) = &self.x_scale {
            e = dataset::apply_scale(&e, scale)?;
        }
        Ok(e)
    }

    /// Coded-response prediction via the coefficient matrix:
    /// `(x − x_mean)·B + y_mean`, one row per input row.
    pub fn predict_response(&self, x_new: &Matrix) -> Result<Matrix, PlsError> {
        let e = self.prepare(x_new)?;
        let fitted = e.matmul(&self.coefficients)?;
        Ok(Matrix::from_fn(fitted.rows(), fitted.cols(), |i, j| {
            fitted.get(i, j) + self.y_mean[j]
        }))
    }

    /// Coded-response prediction by walking the deflation sequence: score
    /// against each weight vector, deflate by the loading, accumulate the
    /// response loadings. Algebraically identical to
    /// [`Self::predict_response`]; kept as an independent route.
    pub fn predict_response_via_scores(&self, x_new: &Matrix) -> Result<Matrix, PlsError> {
        let e0 = self.prepare(x_new)?;
        let j = self.x_mean.len();
        let k = self.y_mean.len();
        let mut out = Matrix::zeros(x_new.rows(), k);
        for i in 0..x_new.rows() {
            let mut e: Vec<f64> = e0.row(i).to_vec();
            let mut y: Vec<f64> = self.y_mean.clone();
            for p in 0..self.n_components {
                let w = self.weights.column(p);
                let p_load = self.x_loadings.column(p);
                // The training normalizer ‖E·w‖ survives in PᵀW's diagonal:
                // p_pᵀw_p = tᵀE·w = ‖E·w‖ for the unit-norm score t.
                let s = dot(&p_load, &w);
                if s.abs() <= DEGENERATE_NORM {
                    return Err(PlsError::SingularPtw);
                }
                let t = dot(&e, &w) / s;
                for col in 0..j {
                    e[col] -= t * p_load[col];
                }
                for (col, y_val) in y.iter_mut().enumerate() {
                    *y_val += t * self.y_loadings.get(col, p);
                }
            }
            for (col, &v) in y.iter().enumerate() {
                out.set(i, col, v);
            }
        }
        Ok(out)
    }

    /// Class prediction: argmax across the coded response, ties to the lowest
    /// class index.
    pub fn predict(&self, x_new: &Matrix) -> Result<Vec<usize>, PlsError> {
        let response = self.predict_response(x_new)?;
        Ok((0..response.rows())
            .map(|i| argmax_lowest(response.row(i)))
            .collect())
    }

    /// Projects rows onto the model's score space (one column per component).
    pub fn project_scores(&self, x_new: &Matrix) -> Result<Matrix, PlsError> {
        let e0 = self.prepare(x_new)?;
        let mut out = Matrix::zeros(x_new.rows(), self.n_components);
        for i in 0..x_new.rows() {
            let mut e: Vec<f64> = e0.row(i).to_vec();
            for p in 0..self.n_components {
                let w = self.weights.column(p);
                let p_load = self.x_loadings.column(p);
                let s = dot(&p_load, &w);
                if s.abs() <= DEGENERATE_NORM {
                    return Err(PlsError::SingularPtw);
                }
                let t = dot(&e, &w) / s;
                for (col, &pl) in p_load.iter().enumerate() {
                    e[col] -= t * pl;
                }
                out.set(i, p, t);
            }
        }
        Ok(out)
    }
}

pub(crate) fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fits PLS-DA for each component count in `p_range`, scores the training
/// predictions with the chi-squared statistic, and returns the maximizing
/// count (ties to the smallest) along with the full curve for scree plots.
pub fn select_components(
    data: &LabeledDataset,
    p_range: std::ops::RangeInclusive<usize>,
    autoscale: bool,
) -> Result<(usize, Vec<(usize, f64)>), PlsError> {
    let max = (data.n_samples() - 1).min(data.spectra().cols());
    let (lo, hi) = (*p_range.start(), *p_range.end());
    if lo == 0 || lo > hi || hi > max {
        return Err(PlsError::InvalidComponents {
            requested: hi,
            max,
        });
    }
    let mut curve = Vec::with_capacity(hi - lo + 1);
    let mut best = (lo, f64::NEG_INFINITY);
    for p in lo..=hi {
        let model = fit_plsda(data, p, autoscale)?;
        let predicted = model.predict(data.spectra())?;
        let cm = ConfusionMatrix::from_labels(data.labels(), &predicted, data.n_classes())?;
        let chi2 = metrics::chi_squared(&cm);
        curve.push((p, chi2));
        if chi2 > best.1 {
            best = (p, chi2);
        }
    }
    Ok((best.0, curve))
}
