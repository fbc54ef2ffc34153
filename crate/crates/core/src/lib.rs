//! Classifiers, metrics, and dataset handling for high-dimensional spectral
//! data.
//!
//! The crate bundles everything needed to benchmark classification methods on
//! spectra whose neighboring wavelengths are strongly correlated: a synthetic
//! data generator, balanced train/test splitting, partial-least-squares
//! discriminant analysis with component selection, four discriminant-analysis
//! variants built on scatter matrices, k-nearest neighbors, a linear
//! multiclass support vector machine, agreement metrics, and versioned model
//! persistence. All numerics run on a small deterministic dense kernel in
//! [`linalg`]; no system BLAS or LAPACK is required and repeated runs produce
//! bitwise-identical results.

pub mod dataset;
pub mod discriminant;
pub mod linalg;
pub mod metrics;
pub mod neighbors;
pub mod persist;
pub mod pls;
pub mod svm;

pub use dataset::{LabeledDataset, SynthConfig, TrainTestSplit, WavelengthGrid};
pub use discriminant::{DiscriminantModel, DiscriminantVariant, ScatterSet};
pub use linalg::{EigenDecomposition, Matrix};
pub use metrics::{ConfusionMatrix, EvaluationReport};
pub use neighbors::KnnModel;
pub use persist::StoredModel;
pub use pls::PlsModel;
pub use svm::{SvmConfig, SvmModel};
