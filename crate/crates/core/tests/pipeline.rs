//! Full library pipeline on a reduced problem: generate spectra, split,
//! train every classifier, and evaluate — twice, to pin determinism.

use spectral_core::dataset::{self, SynthConfig, WavelengthGrid};
use spectral_core::discriminant::{self, ScatterSet};
use spectral_core::metrics::EvaluationReport;
use spectral_core::neighbors::KnnModel;
use spectral_core::pls;
use spectral_core::svm::{self, SvmConfig};
use spectral_core::StoredModel;

fn small_problem() -> SynthConfig {
    SynthConfig {
        classes: 3,
        per_class: 18,
        grid: WavelengthGrid::new(1100.0, 10.0, 121).unwrap(),
        ..SynthConfig::default()
    }
}

#[test]
fn every_classifier_beats_chance_on_heldout_spectra() {
    let data = dataset::synth_spectra(&small_problem()).unwrap();
    let split = data.balanced_split(0.7, 42).unwrap();
    let train = data.subset(&split.train_indices).unwrap();
    let test = data.subset(&split.test_indices).unwrap();

    let (best_p, curve) = pls::select_components(&train, 1..=8, false).unwrap();
    assert!(curve.len() == 8 && (1..=8).contains(&best_p));
    let plsda = pls::fit_plsda(&train, best_p, false).unwrap();

    let scatter = ScatterSet::compute(&train).unwrap();
    let knn = KnnModel::from_dataset(&train, 3).unwrap();
    let svm_model = svm::fit_svm(
        train.spectra(),
        train.labels(),
        train.n_classes(),
        &SvmConfig::default(),
    )
    .unwrap();
    let dlda = discriminant::fit_dlda(&scatter, None).unwrap();
    let mlda = discriminant::fit_mlda(&scatter).unwrap();
    let slda = discriminant::fit_slda(&scatter, 0.5).unwrap();

    // n − K = 33 < 121 wavelengths: classical LDA must refuse.
    assert!(matches!(
        discriminant::fit_lda(&scatter),
        Err(discriminant::DiscriminantError::SingularWithinScatter)
    ));

    let predictions: Vec<(&str, Vec<usize>)> = vec![
        ("PLS-DA", plsda.predict(test.spectra()).unwrap()),
        ("KNN", knn.predict(test.spectra()).unwrap()),
        ("SVM", svm_model.predict(test.spectra()).unwrap()),
        ("DLDA", dlda.classify(test.spectra()).unwrap()),
        ("MLDA", mlda.classify(test.spectra()).unwrap()),
        ("SLDA", slda.classify(test.spectra()).unwrap()),
    ];
    for (name, predicted) in &predictions {
        let report =
            EvaluationReport::compute(test.labels(), predicted, test.n_classes()).unwrap();
        assert!(
            report.mis <= 0.25,
            "{name} misclassified too much: {}",
            report.mis
        );
        assert!(report.ari >= 0.4, "{name} ARI too low: {}", report.ari);
        assert!(report.chi2 > 0.0, "{name} lost all association");
    }
}

#[test]
fn whole_pipeline_is_deterministic() {
    let run = || {
        let data = dataset::synth_spectra(&small_problem()).unwrap();
        let split = data.balanced_split(0.7, 7).unwrap();
        let train = data.subset(&split.train_indices).unwrap();
        let test = data.subset(&split.test_indices).unwrap();
        let model = pls::fit_plsda(&train, 4, false).unwrap();
        let stored = StoredModel::PlsDa {
            class_names: train.class_names().to_vec(),
            model,
        };
        let json = stored.to_json().unwrap();
        let predicted = stored.predict(test.spectra()).unwrap();
        (json, predicted)
    };
    let (json_a, pred_a) = run();
    let (json_b, pred_b) = run();
    assert_eq!(json_a, json_b, "model bytes must not vary between runs");
    assert_eq!(pred_a, pred_b);
}

#[test]
fn gamma_selection_runs_on_a_reduced_grid() {
    let config = SynthConfig {
        classes: 2,
        per_class: 10,
        grid: WavelengthGrid::new(1100.0, 50.0, 9).unwrap(),
        ..SynthConfig::default()
    };
    let data = dataset::synth_spectra(&config).unwrap();
    let grid: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
    let (best, curve) = discriminant::select_gamma(&data, &grid).unwrap();
    assert!(grid.contains(&best));
    assert_eq!(curve.len(), grid.len());
    for (slot, &(gamma, accuracy)) in curve.iter().enumerate() {
        assert_eq!(gamma, grid[slot], "curve preserves grid order");
        assert!((0.0..=1.0).contains(&accuracy));
    }
    // The winner's accuracy is the maximum of the curve, ties at lower gamma.
    let best_acc = curve
        .iter()
        .find(|&&(g, _)| g == best)
        .map(|&(_, a)| a)
        .unwrap();
    for &(gamma, accuracy) in &curve {
        assert!(accuracy <= best_acc || gamma > best);
        if accuracy == best_acc {
            assert!(gamma >= best, "ties must resolve to the smallest gamma");
        }
    }
}
