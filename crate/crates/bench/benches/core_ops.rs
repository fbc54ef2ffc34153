//! Micro-benchmarks for the numeric kernels that dominate pipeline runtime:
//! the symmetric eigensolver, the PLS fit, scatter assembly, discriminant
//! fits, neighbor prediction, and the margin trainer.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use spectral_core::dataset::{self, LabeledDataset, SynthConfig, WavelengthGrid};
use spectral_core::discriminant::{self, ScatterSet};
use spectral_core::linalg;
use spectral_core::neighbors::KnnModel;
use spectral_core::pls;
use spectral_core::svm::{self, SvmConfig};

/// 36 spectra over 121 channels: the default wide problem scaled down far
/// enough that each iteration stays in the millisecond range.
fn small_spectra() -> LabeledDataset {
    dataset::synth_spectra(&SynthConfig {
        per_class: 12,
        grid: WavelengthGrid::new(1100.0, 10.0, 121).unwrap(),
        ..SynthConfig::default()
    })
    .unwrap()
}

fn bench_sym_eigen(c: &mut Criterion) {
    let data = dataset::synth_spectra(&SynthConfig {
        per_class: 12,
        grid: WavelengthGrid::new(1100.0, 20.0, 60).unwrap(),
        ..SynthConfig::default()
    })
    .unwrap();
    let scatter = ScatterSet::compute(&data).unwrap();
    let pooled = scatter.s_p().clone();
    c.bench_function("sym_eigen_60x60", |b| {
        b.iter(|| linalg::sym_eigen(black_box(&pooled)).unwrap())
    });
}

fn bench_pls_fit(c: &mut Criterion) {
    let data = small_spectra();
    c.bench_function("fit_plsda_3_components", |b| {
        b.iter(|| pls::fit_plsda(black_box(&data), 3, false).unwrap())
    });
}

fn bench_scatter(c: &mut Criterion) {
    let data = small_spectra();
    c.bench_function("scatter_compute_36x121", |b| {
        b.iter(|| ScatterSet::compute(black_box(&data)).unwrap())
    });
}

fn bench_dlda(c: &mut Criterion) {
    let data = small_spectra();
    let scatter = ScatterSet::compute(&data).unwrap();
    c.bench_function("fit_dlda", |b| {
        b.iter(|| discriminant::fit_dlda(black_box(&scatter), None).unwrap())
    });
}

fn bench_knn_predict(c: &mut Criterion) {
    let data = small_spectra();
    let model = KnnModel::from_dataset(&data, 3).unwrap();
    c.bench_function("knn_predict_36_queries", |b| {
        b.iter(|| model.predict(black_box(data.spectra())).unwrap())
    });
}

fn bench_svm_fit(c: &mut Criterion) {
    let data = small_spectra();
    let (centered, _) = dataset::center(data.spectra());
    let config = SvmConfig {
        epochs: 100,
        ..SvmConfig::default()
    };
    c.bench_function("fit_svm_100_epochs", |b| {
        b.iter(|| svm::fit_svm(black_box(&centered), data.labels(), 3, &config).unwrap())
    });
}

criterion_group!(
    benches,
    bench_sym_eigen,
    bench_pls_fit,
    bench_scatter,
    bench_dlda,
    bench_knn_predict,
    bench_svm_fit
);
criterion_main!(benches);
