//! Dense `f64` matrix primitives: multiplication, transposition, symmetric
//! eigendecomposition, and linear solves.
//!
//! The eigensolver is a cyclic Jacobi iteration and the solver is Gaussian
//! elimination with partial pivoting — chosen for determinism and simplicity
//! over raw speed; problem sizes in this crate stay in the hundreds. Every
//! routine uses fixed iteration orders and fixed tie-breaking, so repeated
//! calls on identical inputs are bit-identical.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for the symmetry precheck in [`sym_eigen`].
const SYMMETRY_RTOL: f64 = 1e-10;
/// Off-diagonal entries below `1e-12 * ||A||_F` count as annihilated.
const JACOBI_OFF_RTOL: f64 = 1e-12;
/// Hard cap on Jacobi sweeps before giving up.
const JACOBI_MAX_SWEEPS: usize = 100;
/// Pivots below `1e-12 * max|a_ij|` are treated as singular.
const PIVOT_RTOL: f64 = 1e-12;
/// Eigenvalues above `1e-10 * lambda_max` count toward the numerical rank.
const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    DataLength {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite entry {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {delta:e}")]
    NotSymmetric { row: usize, col: usize, delta: f64 },
    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is numerically singular (pivot {pivot:e} at elimination column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
}

/// Row-major dense matrix of `f64` with at least one row and one column.
/// Entries are finite; boundary constructors validate, internal arithmetic
/// is trusted to preserve finiteness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Unvalidated mirror of [`Matrix`] used as the deserialization gate.
#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = LinalgError;

    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        Matrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DataLength {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        for (i, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(LinalgError::NonFinite {
                    row: i / cols,
                    col: i % cols,
                    value: v,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Zero matrix. Panics if either dimension is zero (programmer error).
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        if rows.is_empty() {
            return Err(LinalgError::EmptyMatrix);
        }
        let cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::DataLength {
                    rows: rows.len(),
                    cols,
                    expected: cols,
                    got: r.len(),
                });
            }
            let _ = i;
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let c = self.cols;
        &mut self.data[r * c..(r + 1) * c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// New matrix holding the given rows of `self`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self, LinalgError> {
        if indices.is_empty() {
            return Err(LinalgError::EmptyMatrix);
        }
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(LinalgError::ShapeMismatch {
                    left_rows: self.rows,
                    left_cols: self.cols,
                    right_rows: i,
                    right_cols: 0,
                });
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(self.shape_mismatch(rhs));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = rhs.row(k);
                for j in 0..rhs.cols {
                    orow[j] += aik * brow[j];
                }
            }
        }
        Ok(out)
    }

    /// `self^T * rhs` without materializing the transpose.
    pub fn tr_matmul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.rows != rhs.rows {
            return Err(self.shape_mismatch(rhs));
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let arow = self.row(k);
            let brow = rhs.row(k);
            for (i, &aki) in arow.iter().enumerate() {
                if aki == 0.0 {
                    continue;
                }
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for j in 0..rhs.cols {
                    orow[j] += aki * brow[j];
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector `v`.
    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if self.cols != v.len() {
            return Err(LinalgError::ShapeMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(self.shape_mismatch(rhs));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(self.shape_mismatch(rhs));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn trace(&self) -> Result<f64, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                means[j] += v;
            }
        }
        let n = self.rows as f64;
        for m in &mut means {
            *m /= n;
        }
        means
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    fn shape_mismatch(&self, rhs: &Self) -> LinalgError {
        LinalgError::ShapeMismatch {
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: rhs.rows,
            right_cols: rhs.cols,
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigendecomposition of a symmetric matrix. `values` are sorted in
/// descending order; column `i` of `vectors` is the eigenvector for
/// `values[i]`, sign-fixed so its largest-magnitude entry is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Symmetric eigendecomposition by cyclic Jacobi sweeps.
///
/// The input must be square and symmetric to within `1e-10 * max(1, max|a|)`;
/// it is then symmetrized exactly and rotated pairwise in a fixed (p, q)
/// order until every off-diagonal entry falls below `1e-12 * ||A||_F`, up to
/// 100 sweeps.
pub fn sym_eigen(a: &Matrix) -> Result<EigenDecomposition, LinalgError> {
    let n = a.rows();
    if a.rows() != a.cols() {
        return Err(LinalgError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let sym_tol = SYMMETRY_RTOL * 1.0_f64.max(a.max_abs());
    for i in 0..n {
        for j in (i + 1)..n {
            let delta = (a.get(i, j) - a.get(j, i)).abs();
            if delta >= sym_tol {
                return Err(LinalgError::NotSymmetric {
                    row: i,
                    col: j,
                    delta,
                });
            }
        }
    }

    // Work on an exactly symmetric copy so rotations preserve symmetry.
    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, avg);
            m.set(j, i, avg);
        }
    }
    let mut v = Matrix::identity(n);
    let off_tol = JACOBI_OFF_RTOL * m.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let mut worst = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                worst = worst.max(m.get(p, q).abs());
            }
        }
        if worst <= off_tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= off_tol {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                // t = sign(theta) / (|theta| + sqrt(theta^2 + 1)), switching to
                // the 1/(2 theta) limit when theta^2 would lose the +1 entirely.
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let s = theta.hypot(1.0);
                    if theta >= 0.0 {
                        1.0 / (theta + s)
                    } else {
                        1.0 / (theta - s)
                    }
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = m.get(i, p);
                    let aiq = m.get(i, q);
                    let new_p = c * aip - s * aiq;
                    let new_q = s * aip + c * aiq;
                    m.set(i, p, new_p);
                    m.set(p, i, new_p);
                    m.set(i, q, new_q);
                    m.set(q, i, new_q);
                }
                m.set(p, p, app - t * apq);
                m.set(q, q, aqq + t * apq);
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);

                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }

    // Sort eigenpairs by descending eigenvalue; stable on ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m.get(j, j)
            .partial_cmp(&m.get(i, i))
            .expect("eigenvalues of a finite symmetric matrix are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Sign convention: largest-magnitude entry positive (first such entry
        // on exact magnitude ties).
        let mut pivot = 0usize;
        let mut best = -1.0_f64;
        for i in 0..n {
            let mag = v.get(i, old_col).abs();
            if mag > best {
                best = mag;
                pivot = i;
            }
        }
        let flip = if v.get(pivot, old_col) < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors.set(i, new_col, flip * v.get(i, old_col));
        }
    }

    Ok(EigenDecomposition { values, vectors })
}

/// Solve `a * x = b` (with `b` allowed multiple columns) by Gaussian
/// elimination with partial pivoting. Pivot ties go to the smallest row
/// index; a pivot below `1e-12 * max|a|` reports [`LinalgError::Singular`].
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.rows();
    if a.rows() != a.cols() {
        return Err(LinalgError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.rows() != n {
        return Err(LinalgError::ShapeMismatch {
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let tol = PIVOT_RTOL * a.max_abs();
    let mut m = a.clone();
    let mut x = b.clone();
    let nrhs = x.cols();

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = m.get(k, k).abs();
        for i in (k + 1)..n {
            let cand = m.get(i, k).abs();
            if cand > pivot_val {
                pivot_val = cand;
                pivot_row = i;
            }
        }
        if pivot_val <= tol {
            return Err(LinalgError::Singular {
                column: k,
                pivot: pivot_val,
            });
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = m.get(k, j);
                m.set(k, j, m.get(pivot_row, j));
                m.set(pivot_row, j, tmp);
            }
            for j in 0..nrhs {
                let tmp = x.get(k, j);
                x.set(k, j, x.get(pivot_row, j));
                x.set(pivot_row, j, tmp);
            }
        }
        let pivot = m.get(k, k);
        for i in (k + 1)..n {
            let factor = m.get(i, k) / pivot;
            if factor == 0.0 {
                continue;
            }
            m.set(i, k, 0.0);
            for j in (k + 1)..n {
                let v = m.get(i, j) - factor * m.get(k, j);
                m.set(i, j, v);
            }
            for j in 0..nrhs {
                let v = x.get(i, j) - factor * x.get(k, j);
                x.set(i, j, v);
            }
        }
    }

    for k in (0..n).rev() {
        let pivot = m.get(k, k);
        for j in 0..nrhs {
            let mut acc = x.get(k, j);
            for i in (k + 1)..n {
                acc -= m.get(k, i) * x.get(i, j);
            }
            x.set(k, j, acc / pivot);
        }
    }
    Ok(x)
}

/// Numerical rank of a symmetric positive semidefinite matrix: the count of
/// eigenvalues above `1e-10 * lambda_max`.
pub fn rank(a: &Matrix) -> Result<usize, LinalgError> {
    let eig = sym_eigen(a)?;
    let lambda_max = eig.values[0];
    if lambda_max <= 0.0 {
        return Ok(0);
    }
    let tol = RANK_RTOL * lambda_max;
    Ok(eig.values.iter().filter(|&&v| v > tol).count())
}
