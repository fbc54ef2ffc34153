//! Labeled spectra: CSV ingestion/emission, centering and scaling, balanced
//! train/test splitting, and a deterministic synthetic-spectra generator.
//!
//! Class labels are stored as 0-based indices into `class_names`; every file
//! and CLI boundary speaks class names, never raw indices.

use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("file not found: {path}")]
    FileNotFound { path: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },
    #[error("label column {name:?} not present in header")]
    MissingLabelColumn { name: String },
    #[error("no data rows")]
    EmptyDataset,
    #[error("class {class:?} has {count} members, too few for the requested operation")]
    ClassTooSmall { class: String, count: usize },
    #[error("train fraction must lie strictly between 0 and 1, got {fraction}")]
    InvalidFraction { fraction: f64 },
    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Uniformly spaced wavelength axis in nanometers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct WavelengthGrid {
    start_nm: f64,
    step_nm: f64,
    count: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    start_nm: f64,
    step_nm: f64,
    count: usize,
}

impl TryFrom<RawGrid> for WavelengthGrid {
    type Error = DatasetError;

    fn try_from(raw: RawGrid) -> Result<Self, Self::Error> {
        WavelengthGrid::new(raw.start_nm, raw.step_nm, raw.count)
    }
}

impl WavelengthGrid {
    pub fn new(start_nm: f64, step_nm: f64, count: usize) -> Result<Self, DatasetError> {
        if !start_nm.is_finite() || !step_nm.is_finite() || step_nm <= 0.0 || count == 0 {
            return Err(DatasetError::InvalidConfig {
                message: format!(
                    "wavelength grid needs finite start, step > 0, count >= 1 \
                     (got start {start_nm}, step {step_nm}, count {count})"
                ),
            });
        }
        Ok(Self {
            start_nm,
            step_nm,
            count,
        })
    }

    pub fn start_nm(&self) -> f64 {
        self.start_nm
    }

    pub fn step_nm(&self) -> f64 {
        self.step_nm
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Wavelength of the `j`-th channel.
    pub fn wavelength(&self, j: usize) -> f64 {
        self.start_nm + self.step_nm * j as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.wavelength(j)).collect()
    }
}

impl Default for WavelengthGrid {
    /// 1100–2300 nm in 2 nm steps: 601 channels.
    fn default() -> Self {
        Self {
            start_nm: 1100.0,
            step_nm: 2.0,
            count: 601,
        }
    }
}

/// Spectra with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    spectra: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
    grid: WavelengthGrid,
}

/// Row indices of a stratified train/test partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTestSplit {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

impl LabeledDataset {
    /// Class names must be non-empty, unique, and free of commas, quotes, and
    /// line breaks so CSV emission never needs escaping. Every class index
    /// must occur in `labels` at least once.
    pub fn new(
        spectra: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
        grid: WavelengthGrid,
    ) -> Result<Self, DatasetError> {
        let invalid = |message: String| DatasetError::InvalidConfig { message };
        if labels.len() != spectra.rows() {
            return Err(invalid(format!(
                "{} labels for {} spectra rows",
                labels.len(),
                spectra.rows()
            )));
        }
        if spectra.cols() != grid.count() {
            return Err(invalid(format!(
                "{} spectral channels but grid declares {}",
                spectra.cols(),
                grid.count()
            )));
        }
        if class_names.is_empty() {
            return Err(invalid("no class names".into()));
        }
        for (k, name) in class_names.iter().enumerate() {
            if name.is_empty() || name.contains([',', '"', '\n', '\r']) {
                return Err(invalid(format!(
                    "class name {name:?} is empty or contains CSV-breaking characters"
                )));
            }
            if class_names[..k].contains(name) {
                return Err(invalid(format!("duplicate class name {name:?}")));
            }
        }
        let mut seen = vec![false; class_names.len()];
        for &label in &labels {
            if label >= class_names.len() {
                return Err(invalid(format!(
                    "label index {label} out of range for {} classes",
                    class_names.len()
                )));
            }
            seen[label] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(invalid(format!(
                "class {:?} has no samples",
                class_names[k]
            )));
        }
        Ok(Self {
            spectra,
            labels,
            class_names,
            grid,
        })
    }

    pub fn spectra(&self) -> &Matrix {
        &self.spectra
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn n_samples(&self) -> usize {
        self.spectra.rows()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Samples per class, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes()];
        for &label in &self.labels {
            counts[label] += 1;
        }
        counts
    }

    /// Dataset restricted to the given rows (in the given order), keeping the
    /// full class list. Every class must remain represented.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, DatasetError> {
        let spectra = self.spectra.select_rows(indices)?;
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(spectra, labels, self.class_names.clone(), self.grid.clone())
    }

    /// Stratified split: per class, `floor(train_fraction * n_k)` rows go to
    /// train and the rest to test, chosen uniformly at random under `seed`.
    /// Both index lists come back sorted.
    pub fn balanced_split(
        &self,
        train_fraction: f64,
        seed: u64,
    ) -> Result<TrainTestSplit, DatasetError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(DatasetError::InvalidFraction {
                fraction: train_fraction,
            });
        }
        let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); self.n_classes()];
        for (i, &label) in self.labels.iter().enumerate() {
            per_class[label].push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (k, indices) in per_class.iter_mut().enumerate() {
            let n_k = indices.len();
            // The epsilon absorbs cases like 37/54 * 54 landing one ulp below
            // the integer it represents.
            let take = ((train_fraction * n_k as f64) + 1e-9).floor() as usize;
            if n_k < 2 || take == 0 || take == n_k {
                return Err(DatasetError::ClassTooSmall {
                    class: self.class_names[k].clone(),
                    count: n_k,
                });
            }
            indices.shuffle(&mut rng);
            train.extend_from_slice(&indices[..take]);
            test.extend_from_slice(&indices[take..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        Ok(TrainTestSplit {
            train_indices: train,
            test_indices: test,
            seed,
        })
    }

    /// Writes `label,w<nm>,...` CSV with 9-significant-digit values.
    pub fn write_csv(&self, path: &Path) -> Result<(), DatasetError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(out, "label")?;
        for w in self.grid.values() {
            write!(out, ",w{w}")?;
        }
        writeln!(out)?;
        for (i, &label) in self.labels.iter().enumerate() {
            write!(out, "{}", self.class_names[label])?;
            for &v in self.spectra.row(i) {
                write!(out, ",{v:.8e}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads a CSV written by [`LabeledDataset::write_csv`] (or hand-made in the
/// same shape). Class indices follow first appearance of each label string;
/// the wavelength grid is reconstructed from the header. Rows and columns in
/// errors are 1-based file coordinates.
pub fn load_csv(path: &Path, label_column: &str) -> Result<LabeledDataset, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            DatasetError::FileNotFound {
                path: path.display().to_string(),
            }
        } else {
            DatasetError::Io(e)
        }
    })?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, header) = lines.next().ok_or(DatasetError::EmptyDataset)?;
    let cells: Vec<&str> = header.split(',').collect();
    let label_pos = cells
        .iter()
        .position(|&c| c == label_column)
        .ok_or_else(|| DatasetError::MissingLabelColumn {
            name: label_column.to_string(),
        })?;

    let mut wavelengths = Vec::with_capacity(cells.len() - 1);
    for (j, &cell) in cells.iter().enumerate() {
        if j == label_pos {
            continue;
        }
        let numeric = cell.strip_prefix('w').unwrap_or(cell);
        let w: f64 = numeric.parse().map_err(|_| DatasetError::Parse {
            row: 1,
            col: j + 1,
            message: format!("header cell {cell:?} is not a wavelength"),
        })?;
        wavelengths.push((j, w));
    }
    if wavelengths.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let count = wavelengths.len();
    let start = wavelengths[0].1;
    let step = if count >= 2 {
        (wavelengths[count - 1].1 - start) / (count - 1) as f64
    } else {
        WavelengthGrid::default().step_nm()
    };
    for (idx, &(j, w)) in wavelengths.iter().enumerate() {
        let expected = start + step * idx as f64;
        if (w - expected).abs() > 1e-6 * expected.abs().max(1.0) {
            return Err(DatasetError::Parse {
                row: 1,
                col: j + 1,
                message: format!(
                    "wavelength {w} is off the uniform grid (expected {expected})"
                ),
            });
        }
    }
    let grid = WavelengthGrid::new(start, step, count)?;

    let mut class_names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut n_rows = 0usize;
    for (row, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != count + 1 {
            return Err(DatasetError::Parse {
                row,
                col: cells.len(),
                message: format!("expected {} cells, found {}", count + 1, cells.len()),
            });
        }
        let name = cells[label_pos];
        let label = match class_names.iter().position(|c| c == name) {
            Some(k) => k,
            None => {
                class_names.push(name.to_string());
                class_names.len() - 1
            }
        };
        labels.push(label);
        for (j, &cell) in cells.iter().enumerate() {
            if j == label_pos {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| DatasetError::Parse {
                row,
                col: j + 1,
                message: format!("cell {cell:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(DatasetError::Parse {
                    row,
                    col: j + 1,
                    message: format!("cell {cell:?} is not finite"),
                });
            }
            values.push(v);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(DatasetError::EmptyDataset);
    }
    let spectra = Matrix::new(n_rows, count, values)?;
    LabeledDataset::new(spectra, labels, class_names, grid)
}

/// Column-centers a matrix; returns the centered copy and the mean vector.
pub fn center(x: &Matrix) -> (Matrix, Vec<f64>) {
    let means = x.column_means();
    let centered = Matrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) - means[j]);
    (centered, means)
}

/// Subtracts a previously computed mean vector (e.g. train means applied to
/// test rows).
pub fn apply_center(x: &Matrix, mean: &[f64]) -> Result<Matrix, DatasetError> {
    if x.cols() != mean.len() {
        return Err(LinalgError::ShapeMismatch {
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: mean.len(),
            right_cols: 1,
        }
        .into());
    }
    Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
        x.get(i, j) - mean[j]
    }))
}

/// Per-column sample standard deviation (n−1 denominator); columns with no
/// spread report 1.0 so dividing by the result is always safe.
pub fn column_std(x: &Matrix) -> Vec<f64> {
    let means = x.column_means();
    let mut acc = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (j, &v) in x.row(i).iter().enumerate() {
            let d = v - means[j];
            acc[j] += d * d;
        }
    }
    let denom = (x.rows().saturating_sub(1)).max(1) as f64;
    acc.into_iter()
        .map(|s| {
            let sd = (s / denom).sqrt();
            if sd < 1e-12 {
                1.0
            } else {
                sd
            }
        })
        .collect()
}

/// Divides each column by its entry in `scale`.
pub fn apply_scale(x: &Matrix, scale: &[f64]) -> Result<Matrix, DatasetError> {
    if x.cols() != scale.len() {
        return Err(LinalgError::ShapeMismatch {
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: scale.len(),
            right_cols: 1,
        }
        .into());
    }
    Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
        x.get(i, j) / scale[j]
    }))
}

/// Configuration for [`synth_spectra`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
    pub grid: WavelengthGrid,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 3,
            per_class: 54,
            separation: 1.0,
            noise: 0.0015,
            seed: 42,
            grid: WavelengthGrid::default(),
        }
    }
}

// Shape constants for the synthetic reflectance curves. Bump positions are
// expressed on a normalized [0, 1] axis over the wavelength grid; classes
// shift the bump centers around these anchors. The shift size and the default
// noise level are tuned together so that adjacent channels stay correlated
// above 0.95 even at the inter-bump saddle points where the class mean curves
// cross.
const BUMP_CENTERS: [f64; 3] = [0.22, 0.50, 0.78];
const BUMP_WIDTHS: [f64; 3] = [0.085, 0.120, 0.100];
const BUMP_AMPS: [f64; 3] = [0.42, 0.36, 0.30];
const CENTER_SHIFT_PER_CLASS: f64 = 0.055;

/// Smooth synthetic spectra: a shared sinusoidal baseline plus three Gaussian
/// bumps whose centers (and, mildly, heights) vary by class, plus i.i.d.
/// Gaussian channel noise. Deterministic for a fixed config.
pub fn synth_spectra(config: &SynthConfig) -> Result<LabeledDataset, DatasetError> {
    let invalid = |message: String| DatasetError::InvalidConfig { message };
    if config.classes < 2 {
        return Err(invalid(format!("need at least 2 classes, got {}", config.classes)));
    }
    if config.per_class < 2 {
        return Err(invalid(format!(
            "need at least 2 samples per class, got {}",
            config.per_class
        )));
    }
    if !config.separation.is_finite() || config.separation <= 0.0 {
        return Err(invalid(format!(
            "separation must be positive and finite, got {}",
            config.separation
        )));
    }
    if !config.noise.is_finite() || config.noise < 0.0 {
        return Err(invalid(format!(
            "noise must be non-negative and finite, got {}",
            config.noise
        )));
    }
    if config.grid.count() < 2 {
        return Err(invalid("grid must have at least 2 channels".into()));
    }

    let j_count = config.grid.count();
    let positions: Vec<f64> = (0..j_count)
        .map(|j| j as f64 / (j_count - 1) as f64)
        .collect();
    let baseline: Vec<f64> = positions
        .iter()
        .map(|&u| 0.55 + 0.12 * (2.2 * u + 0.6).sin() + 0.05 * u)
        .collect();

    let half = (config.classes - 1) as f64 / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut data = Vec::with_capacity(config.classes * config.per_class * j_count);
    let mut labels = Vec::with_capacity(config.classes * config.per_class);
    for k in 0..config.classes {
        let spread = (k as f64 - half) * config.separation;
        let shift = CENTER_SHIFT_PER_CLASS * spread;
        let mean_curve: Vec<f64> = positions
            .iter()
            .zip(&baseline)
            .map(|(&u, &base)| {
                let mut v = base;
                for b in 0..3 {
                    let d = u - BUMP_CENTERS[b] - shift;
                    v += BUMP_AMPS[b] * (-d * d / (2.0 * BUMP_WIDTHS[b] * BUMP_WIDTHS[b])).exp();
                }
                v
            })
            .collect();
        for _ in 0..config.per_class {
            labels.push(k);
            for &m in &mean_curve {
                let eps: f64 = if config.noise > 0.0 {
                    rng.sample(StandardNormal)
                } else {
                    0.0
                };
                data.push(m + config.noise * eps);
            }
        }
    }
    let spectra = Matrix::new(config.classes * config.per_class, j_count, data)?;
    let class_names = (0..config.classes)
        .map(|k| format!("class_{}", k + 1))
        .collect();
    LabeledDataset::new(spectra, labels, class_names, config.grid.clone())
}
