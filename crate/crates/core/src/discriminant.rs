//! Scatter-matrix construction and the discriminant classifiers: LDA (Fisher
//! criterion), DLDA (direct between-scatter diagonalization), SLDA (shrunken
//! pooled covariance), and MLDA (eigenvalue flooring), all with
//! nearest-centroid allocation in the projected space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, LabeledDataset};
use crate::linalg::{self, LinalgError, Matrix};

/// Within-scatter spectra with min/max eigenvalue ratio below this are
/// reported singular rather than inverted.
const WITHIN_COND_RTOL: f64 = 1e-10;
/// Eigenvalues below this relative cut do not count toward matrix rank.
const RANK_RTOL: f64 = 1e-10;
/// Absolute floor for eigenvalues that must be inverted in the DLDA path.
const DLDA_EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DiscriminantError {
    #[error("class {class:?} has {count} members; scatter matrices need at least 2 per class")]
    ClassTooSmall { class: String, count: usize },
    #[error(
        "within-class scatter is numerically singular; \
         use DLDA, SLDA with gamma > 0, or MLDA instead"
    )]
    SingularWithinScatter,
    #[error("requested {requested} directions but the between-class scatter has rank {max}")]
    MTooLarge { requested: usize, max: usize },
    #[error("a retained eigenvalue of the {matrix} is numerically zero; shrink the projection")]
    ZeroEigenvalue { matrix: &'static str },
    #[error("gamma must lie in [0, 1], got {gamma}")]
    GammaOutOfRange { gamma: f64 },
    #[error("gamma grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Between-class, within-class, and pooled scatter matrices of a labeled
/// dataset, together with the means they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSet {
    s_b: Matrix,
    s_w: Matrix,
    s_p: Matrix,
    class_means: Matrix,
    overall_mean: Vec<f64>,
    class_counts: Vec<usize>,
    class_names: Vec<String>,
    n: usize,
}

impl ScatterSet {
    /// Accumulates the three scatter matrices. Each is built on the upper
    /// triangle and mirrored, so exact symmetry holds by construction, and
    /// the pooled matrix is the within matrix divided by `n − K`.
    pub fn compute(data: &LabeledDataset) -> Result<Self, DiscriminantError> {
        let counts = data.class_counts();
        if let Some((k, &count)) = counts.iter().enumerate().find(|(_, &c)| c < 2) {
            return Err(DiscriminantError::ClassTooSmall {
                class: data.class_names()[k].to_string(),
                count,
            });
        }
        let x = data.spectra();
        let n = x.rows();
        let j = x.cols();
        let k_classes = data.n_classes();

        let overall_mean = x.column_means();
        let mut class_means = Matrix::zeros(k_classes, j);
        for (i, &label) in data.labels().iter().enumerate() {
            for (col, &v) in x.row(i).iter().enumerate() {
                class_means[(label, col)] += v;
            }
        }
        for (k, &count) in counts.iter().enumerate() {
            let inv = 1.0 / count as f64;
            for col in 0..j {
                class_means[(k, col)] *= inv;
            }
        }

        let mut s_b = Matrix::zeros(j, j);
        for (k, &count) in counts.iter().enumerate() {
            let weight = count as f64;
            let dev: Vec<f64> = (0..j)
                .map(|col| class_means.get(k, col) - overall_mean[col])
                .collect();
            for a in 0..j {
                let w_dev = weight * dev[a];
                let row = s_b.row_mut(a);
                for b in a..j {
                    row[b] += w_dev * dev[b];
                }
            }
        }

        let mut s_w = Matrix::zeros(j, j);
        for (i, &label) in data.labels().iter().enumerate() {
            let dev: Vec<f64> = x
                .row(i)
                .iter()
                .enumerate()
                .map(|(col, &v)| v - class_means.get(label, col))
                .collect();
            for a in 0..j {
                let d_a = dev[a];
                let row = s_w.row_mut(a);
                for b in a..j {
                    row[b] += d_a * dev[b];
                }
            }
        }

        for m in [&mut s_b, &mut s_w] {
            for a in 0..j {
                for b in (a + 1)..j {
                    let v = m.get(a, b);
                    m.set(b, a, v);
                }
            }
        }

        let s_p = s_w.scaled(1.0 / (n - k_classes) as f64);
        Ok(Self {
            s_b,
            s_w,
            s_p,
            class_means,
            overall_mean,
            class_counts: counts,
            class_names: data.class_names().to_vec(),
            n,
        })
    }

    pub fn s_b(&self) -> &Matrix {
        &self.s_b
    }

    pub fn s_w(&self) -> &Matrix {
        &self.s_w
    }

    pub fn s_p(&self) -> &Matrix {
        &self.s_p
    }

    pub fn class_means(&self) -> &Matrix {
        &self.class_means
    }

    pub fn overall_mean(&self) -> &[f64] {
        &self.overall_mean
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn n_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn n_features(&self) -> usize {
        self.overall_mean.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscriminantVariant {
    Lda,
    Dlda,
    Slda,
    Mlda,
}

impl std::fmt::Display for DiscriminantVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Lda => "LDA",
            Self::Dlda => "DLDA",
            Self::Slda => "SLDA",
            Self::Mlda => "MLDA",
        };
        f.write_str(name)
    }
}

/// A fitted discriminant classifier: rows of `projection` are discriminant
/// directions; allocation is nearest projected centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantModel {
    variant: DiscriminantVariant,
    projection: Matrix,
    projected_centroids: Matrix,
    gamma: Option<f64>,
    m: Option<usize>,
    x_mean: Vec<f64>,
    x_scale: Option<Vec<f64>>,
}

impl DiscriminantModel {
    fn assemble(
        variant: DiscriminantVariant,
        projection: Matrix,
        scatter: &ScatterSet,
        gamma: Option<f64>,
        m: Option<usize>,
    ) -> Result<Self, DiscriminantError> {
        // Centroids are the projections of the centered class means, matching
        // the centering applied to incoming rows in `classify`.
        let k = scatter.n_classes();
        let d = projection.rows();
        let mut centroids = Matrix::zeros(k, d);
        for class in 0..k {
            let centered: Vec<f64> = (0..scatter.n_features())
                .map(|col| scatter.class_means.get(class, col) - scatter.overall_mean[col])
                .collect();
            let projected = projection.mat_vec(&centered)?;
            for (dir, &v) in projected.iter().enumerate() {
                centroids.set(class, dir, v);
            }
        }
        Ok(Self {
            variant,
            projection,
            projected_centroids: centroids,
            gamma,
            m,
            x_mean: scatter.overall_mean.clone(),
            x_scale: None,
        })
    }

    pub fn variant(&self) -> DiscriminantVariant {
        self.variant
    }

    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    pub fn projected_centroids(&self) -> &Matrix {
        &self.projected_centroids
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn m(&self) -> Option<usize> {
        self.m
    }

    pub fn x_mean(&self) -> &[f64] {
        &self.x_mean
    }

    pub fn x_scale(&self) -> Option<&[f64]> {
        self.x_scale.as_deref()
    }

    pub fn n_classes(&self) -> usize {
        self.projected_centroids.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x_mean.len()
    }

    /// Attaches a per-column divisor applied to incoming rows before
    /// centering; used when the model was fitted on autoscaled data.
    pub fn with_x_scale(mut self, scale: Vec<f64>) -> Result<Self, DiscriminantError> {
        if scale.len() != self.x_mean.len() {
            return Err(LinalgError::ShapeMismatch {
                left_rows: self.x_mean.len(),
                left_cols: 1,
                right_rows: scale.len(),
                right_cols: 1,
            }
            .into());
        }
        self.x_scale = Some(scale);
        Ok(self)
    }

    /// Shape coherence check for deserialized models.
    pub fn validate(&self) -> Result<(), DiscriminantError> {
        let j = self.x_mean.len();
        let ok = self.projection.cols() == j
            && self.projected_centroids.cols() == self.projection.rows()
            && self.x_scale.as_ref().is_none_or(|s| s.len() == j)
            && self.gamma.is_none_or(|g| (0.0..=1.0).contains(&g));
        if ok {
            Ok(())
        } else {
            Err(LinalgError::ShapeMismatch {
                left_rows: self.projection.rows(),
                left_cols: self.projection.cols(),
                right_rows: self.projected_centroids.rows(),
                right_cols: j,
            }
            .into())
        }
    }

    /// Nearest projected centroid under Euclidean distance; ties go to the
    /// lowest class index.
    pub fn classify(&self, x_new: &Matrix) -> Result<Vec<usize>, DiscriminantError> {
        let mut rows = x_new.clone();
        if let Some(scale) = &self.x_scale {
            rows = dataset::apply_scale(&rows, scale).map_err(|_| LinalgError::ShapeMismatch {
                left_rows: x_new.rows(),
                left_cols: x_new.cols(),
                right_rows: self.x_mean.len(),
                right_cols: 1,
            })?;
        }
        let centered = dataset::apply_center(&rows, &self.x_mean).map_err(|_| {
            LinalgError::ShapeMismatch {
                left_rows: x_new.rows(),
                left_cols: x_new.cols(),
                right_rows: self.x_mean.len(),
                right_cols: 1,
            }
        })?;
        let k = self.n_classes();
        let d = self.projection.rows();
        let mut out = Vec::with_capacity(x_new.rows());
        for i in 0..centered.rows() {
            let t = self.projection.mat_vec(centered.row(i))?;
            let mut best = 0usize;
            let mut best_dist = f64::INFINITY;
            for class in 0..k {
                let mut dist = 0.0;
                for (dir, &t_dir) in t.iter().enumerate().take(d) {
                    let diff = t_dir - self.projected_centroids.get(class, dir);
                    dist += diff * diff;
                }
                if dist < best_dist {
                    best_dist = dist;
                    best = class;
                }
            }
            out.push(best);
        }
        Ok(out)
    }
}

/// Fisher directions for a within structure given by its eigendecomposition
/// `(phi, within_values)`. The between-scatter enters through the centered,
/// count-weighted class means, which keeps the reduced eigenproblem at K×K:
/// with `Ñ = D^{-1/2}Φᵀ[√n_k (m_k − m̄)]`, the nonzero eigenpairs of the
/// J×J whitened between matrix `ÑÑᵀ` are recovered from `ÑᵀÑ`. Directions
/// beyond the between-scatter's effective rank are zero rows. Rows satisfy
/// `aᵀ S̃_w a = 1` for the within matrix `S̃_w = Φ diag(v) Φᵀ`.
fn fisher_directions(
    scatter: &ScatterSet,
    phi: &Matrix,
    within_values: &[f64],
    n_dirs: usize,
) -> Result<Matrix, DiscriminantError> {
    let j = scatter.n_features();
    let k = scatter.n_classes();
    debug_assert!(within_values.iter().all(|&v| v > 0.0));

    let weighted_devs = Matrix::from_fn(j, k, |col, class| {
        (scatter.class_counts[class] as f64).sqrt()
            * (scatter.class_means.get(class, col) - scatter.overall_mean[col])
    });
    let mut n_tilde = phi.tr_matmul(&weighted_devs)?;
    for (row, &v) in within_values.iter().enumerate() {
        let inv_sqrt = 1.0 / v.sqrt();
        for val in n_tilde.row_mut(row) {
            *val *= inv_sqrt;
        }
    }
    let small = n_tilde.tr_matmul(&n_tilde)?;
    let eig = linalg::sym_eigen(&small)?;
    let mu_max = eig.values[0].max(0.0);

    let mut projection = Matrix::zeros(n_dirs, j);
    for dir in 0..n_dirs {
        let mu = if dir < k { eig.values[dir] } else { 0.0 };
        if mu_max <= 0.0 || mu <= RANK_RTOL * mu_max {
            continue; // beyond the between-scatter rank: leave the row zero
        }
        let z = eig.vectors.column(dir);
        let y = n_tilde.mat_vec(&z)?;
        let inv_sqrt_mu = 1.0 / mu.sqrt();
        let scaled: Vec<f64> = y
            .iter()
            .zip(within_values)
            .map(|(&yi, &vi)| yi * inv_sqrt_mu / vi.sqrt())
            .collect();
        let a = phi.mat_vec(&scaled)?;

        let mut pivot = 0usize;
        let mut best = -1.0f64;
        for (col, &v) in a.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                pivot = col;
            }
        }
        let flip = if a[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (col, &v) in a.iter().enumerate() {
            projection.set(dir, col, flip * v);
        }
    }
    Ok(projection)
}

/// Classical Fisher LDA. Fails with [`DiscriminantError::SingularWithinScatter`]
/// whenever the within-class scatter cannot be inverted — in particular
/// always when `n − K < J`, since its rank is at most `n − K`.
pub fn fit_lda(scatter: &ScatterSet) -> Result<DiscriminantModel, DiscriminantError> {
    let j = scatter.n_features();
    let k = scatter.n_classes();
    if scatter.n - k < j {
        return Err(DiscriminantError::SingularWithinScatter);
    }
    let eig = linalg::sym_eigen(&scatter.s_w)?;
    let lambda_max = eig.values[0];
    let lambda_min = *eig.values.last().expect("nonempty spectrum");
    if lambda_max <= 0.0 || lambda_min <= WITHIN_COND_RTOL * lambda_max {
        return Err(DiscriminantError::SingularWithinScatter);
    }
    let projection = fisher_directions(scatter, &eig.vectors, &eig.values, k - 1)?;
    DiscriminantModel::assemble(DiscriminantVariant::Lda, projection, scatter, None, None)
}

/// The shrunken pooled covariance `(1−γ)·S_p + γ·λ̄·I` with
/// `λ̄ = trace(S_p)/J`, materialized as a full matrix.
pub fn shrunken_pooled(scatter: &ScatterSet, gamma: f64) -> Result<Matrix, DiscriminantError> {
    check_gamma(gamma)?;
    let j = scatter.n_features();
    let lambda_bar = scatter.s_p.trace()? / j as f64;
    Ok(Matrix::from_fn(j, j, |a, b| {
        let base = (1.0 - gamma) * scatter.s_p.get(a, b);
        if a == b {
            base + gamma * lambda_bar
        } else {
            base
        }
    }))
}

fn check_gamma(gamma: f64) -> Result<(), DiscriminantError> {
    if !gamma.is_finite() || !(0.0..=1.0).contains(&gamma) {
        return Err(DiscriminantError::GammaOutOfRange { gamma });
    }
    Ok(())
}

/// SLDA: Fisher directions with the within matrix `(n−K)·[(1−γ)S_p + γλ̄I]`.
/// Shrinking leaves the eigenvectors of `S_p` unchanged and maps each
/// eigenvalue λ to `(1−γ)λ + γλ̄`, so the pooled matrix is decomposed once.
pub fn fit_slda(scatter: &ScatterSet, gamma: f64) -> Result<DiscriminantModel, DiscriminantError> {
    check_gamma(gamma)?;
    let eig = linalg::sym_eigen(&scatter.s_p)?;
    let model = slda_from_pooled_eigen(scatter, &eig, gamma)?;
    Ok(model)
}

/// SLDA fit reusing an existing eigendecomposition of `S_p`; lets gamma
/// selection decompose each training fold once instead of once per gamma.
fn slda_from_pooled_eigen(
    scatter: &ScatterSet,
    pooled_eigen: &linalg::EigenDecomposition,
    gamma: f64,
) -> Result<DiscriminantModel, DiscriminantError> {
    let j = scatter.n_features();
    let k = scatter.n_classes();
    let dof = (scatter.n - k) as f64;
    let lambda_bar = scatter.s_p.trace()? / j as f64;
    let within: Vec<f64> = pooled_eigen
        .values
        .iter()
        .map(|&v| dof * ((1.0 - gamma) * v + gamma * lambda_bar))
        .collect();
    let w_max = within.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w_min = within.iter().cloned().fold(f64::INFINITY, f64::min);
    if w_max <= 0.0 || w_min <= WITHIN_COND_RTOL * w_max {
        return Err(DiscriminantError::SingularWithinScatter);
    }
    let projection = fisher_directions(scatter, &pooled_eigen.vectors, &within, k - 1)?;
    DiscriminantModel::assemble(
        DiscriminantVariant::Slda,
        projection,
        scatter,
        Some(gamma),
        None,
    )
}

/// The pooled covariance with eigenvalues floored at their mean:
/// `Φ · diag(max(λ_i, λ̄)) · Φᵀ`.
pub fn floored_pooled(scatter: &ScatterSet) -> Result<Matrix, DiscriminantError> {
    let j = scatter.n_features();
    let lambda_bar = scatter.s_p.trace()? / j as f64;
    let eig = linalg::sym_eigen(&scatter.s_p)?;
    let mut scaled = eig.vectors.clone();
    for col in 0..j {
        let floored = eig.values[col].max(lambda_bar);
        for row in 0..j {
            scaled.set(row, col, scaled.get(row, col) * floored);
        }
    }
    Ok(scaled.matmul(&eig.vectors.transpose())?)
}

/// MLDA: Fisher directions with every pooled eigenvalue below the average
/// dispersion λ̄ raised to λ̄. The floored matrix is always invertible for
/// data with any spread.
pub fn fit_mlda(scatter: &ScatterSet) -> Result<DiscriminantModel, DiscriminantError> {
    let j = scatter.n_features();
    let k = scatter.n_classes();
    let dof = (scatter.n - k) as f64;
    let lambda_bar = scatter.s_p.trace()? / j as f64;
    if lambda_bar <= 0.0 {
        return Err(DiscriminantError::SingularWithinScatter);
    }
    let eig = linalg::sym_eigen(&scatter.s_p)?;
    let within: Vec<f64> = eig
        .values
        .iter()
        .map(|&v| dof * v.max(lambda_bar))
        .collect();
    let projection = fisher_directions(scatter, &eig.vectors, &within, k - 1)?;
    DiscriminantModel::assemble(DiscriminantVariant::Mlda, projection, scatter, None, None)
}

/// The DLDA basis: top-`m` eigenvectors `Y` of `S_b`, their eigenvalues, and
/// the whitening columns `Z = Y·diag(λ^{-1/2})`.
pub fn dlda_basis(
    scatter: &ScatterSet,
    m: Option<usize>,
) -> Result<(Matrix, Vec<f64>, Matrix), DiscriminantError> {
    let eig = linalg::sym_eigen(&scatter.s_b)?;
    let lambda_max = eig.values[0];
    let rank = if lambda_max <= 0.0 {
        0
    } else {
        eig.values
            .iter()
            .filter(|&&v| v > RANK_RTOL * lambda_max)
            .count()
    };
    if rank == 0 {
        return Err(DiscriminantError::ZeroEigenvalue {
            matrix: "between-class scatter",
        });
    }
    let m = m.unwrap_or(rank);
    if m == 0 || m > rank {
        return Err(DiscriminantError::MTooLarge {
            requested: m,
            max: rank,
        });
    }
    let j = scatter.n_features();
    let mut y = Matrix::zeros(j, m);
    let mut z = Matrix::zeros(j, m);
    let mut d_b = Vec::with_capacity(m);
    for col in 0..m {
        let lambda = eig.values[col];
        if lambda < DLDA_EIGEN_FLOOR {
            return Err(DiscriminantError::ZeroEigenvalue {
                matrix: "between-class scatter",
            });
        }
        d_b.push(lambda);
        let inv_sqrt = 1.0 / lambda.sqrt();
        for row in 0..j {
            let v = eig.vectors.get(row, col);
            y.set(row, col, v);
            z.set(row, col, v * inv_sqrt);
        }
    }
    Ok((y, d_b, z))
}

/// DLDA: whiten the between-class scatter with its own top-`m`
/// eigenstructure, then diagonalize the within-class scatter in the whitened
/// coordinates. Never inverts `S_w`, so it works in the `n ≪ J` regime.
pub fn fit_dlda(
    scatter: &ScatterSet,
    m: Option<usize>,
) -> Result<DiscriminantModel, DiscriminantError> {
    let (_, _, z) = dlda_basis(scatter, m)?;
    let m_dims = z.cols();
    let sw_z = scatter.s_w.matmul(&z)?;
    let mut inner = z.tr_matmul(&sw_z)?;
    for a in 0..m_dims {
        for b in (a + 1)..m_dims {
            let avg = 0.5 * (inner.get(a, b) + inner.get(b, a));
            inner.set(a, b, avg);
            inner.set(b, a, avg);
        }
    }
    let eig_w = linalg::sym_eigen(&inner)?;
    let mut projection = Matrix::zeros(m_dims, scatter.n_features());
    for dir in 0..m_dims {
        let d_w = eig_w.values[dir];
        if d_w < DLDA_EIGEN_FLOOR {
            return Err(DiscriminantError::ZeroEigenvalue {
                matrix: "whitened within-class scatter",
            });
        }
        let inv_sqrt = 1.0 / d_w.sqrt();
        let u = eig_w.vectors.column(dir);
        let a_vec = z.mat_vec(&u)?;
        let mut pivot = 0usize;
        let mut best = -1.0f64;
        for (col, &v) in a_vec.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                pivot = col;
            }
        }
        let flip = if a_vec[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (col, &v) in a_vec.iter().enumerate() {
            projection.set(dir, col, flip * inv_sqrt * v);
        }
    }
    DiscriminantModel::assemble(
        DiscriminantVariant::Dlda,
        projection,
        scatter,
        None,
        Some(m_dims),
    )
}

/// Leave-one-out accuracy of SLDA over a gamma grid; returns the maximizing
/// gamma (ties to the smallest, grid order preserved in the curve). A fold
/// whose fit fails — γ = 0 on singular data — counts every held-out row as
/// misclassified, so γ = 0 scores zero rather than aborting the search.
pub fn select_gamma(
    train: &LabeledDataset,
    grid: &[f64],
) -> Result<(f64, Vec<(f64, f64)>), DiscriminantError> {
    if grid.is_empty() {
        return Err(DiscriminantError::EmptyGrid);
    }
    for &gamma in grid {
        check_gamma(gamma)?;
    }
    let n = train.n_samples();
    let mut correct = vec![0usize; grid.len()];
    for held_out in 0..n {
        let fold_rows: Vec<usize> = (0..n).filter(|&i| i != held_out).collect();
        let fold = train.subset(&fold_rows).map_err(|_| {
            DiscriminantError::ClassTooSmall {
                class: train.class_names()[train.labels()[held_out]].to_string(),
                count: 1,
            }
        })?;
        let scatter = ScatterSet::compute(&fold)?;
        let pooled_eigen = linalg::sym_eigen(&scatter.s_p)?;
        let probe = train.spectra().select_rows(&[held_out])?;
        let truth = train.labels()[held_out];
        for (slot, &gamma) in grid.iter().enumerate() {
            match slda_from_pooled_eigen(&scatter, &pooled_eigen, gamma) {
                Ok(model) => {
                    if model.classify(&probe)?[0] == truth {
                        correct[slot] += 1;
                    }
                }
                Err(DiscriminantError::SingularWithinScatter) => {}
                Err(other) => return Err(other),
            }
        }
    }
    let curve: Vec<(f64, f64)> = grid
        .iter()
        .zip(&correct)
        .map(|(&gamma, &c)| (gamma, c as f64 / n as f64))
        .collect();
    let mut best = curve[0];
    for &(gamma, acc) in &curve[1..] {
        if acc > best.1 {
            best = (gamma, acc);
        }
    }
    Ok((best.0, curve))
}
